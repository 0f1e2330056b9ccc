#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imcrawler/coordinator.hpp"

namespace imcrawler {

// Runs one subcommand. `args` excludes the program name. Returns 0 on
// success, 1 for a failed step (stderr: `error[CATEGORY] Code: message`)
// and 2 for usage errors.
int run_cli(const std::vector<std::string>& args);

struct DemoOptions {
    std::uint64_t seed = 42;
    std::size_t n = 500;
    fs::path out = "demo-out";
    double mean_degree = 20.0;
    double disclosure_rate = 0.6;
    std::size_t seed_count = 2;
    std::int64_t depth = 100;
    std::size_t agents = 2;
    std::size_t sessions = 2;
    std::int64_t total_post = 10;
    std::int64_t posts_max = 12;
    double truncate_rate = 0.05;
    std::size_t page_size = 50;
    std::optional<std::string> endpoint;  // host:port or URL to bind; ephemeral port when absent
    AgentMode mode = AgentMode::Thread;
    fs::path agent_binary;
    std::vector<std::string> cities = {"Bangalore", "Delhi", "Mumbai", "Pune"};
};

struct DemoResult {
    nlohmann::json summary;
    nlohmann::json stats;
    std::int64_t duration_ms = 0;
};

// generate -> serve -> seeds -> coordinate -> normalize -> verify ->
// re-extract -> load -> filter -> stats, all inside options.out.
DemoResult run_demo(const DemoOptions& options);

} // namespace imcrawler
