#pragma once

// Host side of a multi-agent crawl. Each agent owns a subset of the seeds,
// runs crawl() with its own session workers and writes its own shard; the
// host merges shards once every agent has reported.
//
// Control channel: a stream socket carrying 4-byte big-endian length
// prefixed JSON messages. See docs/agent-protocol.md.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imcrawler/config_io.hpp"
#include "imcrawler/crawl.hpp"

namespace imcrawler {

struct AgentAssignment {
    std::size_t agent_id = 0;
    std::vector<std::size_t> seed_indices;  // 1-based
    std::size_t sessions = 1;
    fs::path shard_path;

    bool operator==(const AgentAssignment&) const = default;
};

// Round-robin: seed k (0-based) goes to agent k mod n_agents. Shards are
// named `<merged>.shard-<id>.csv`.
std::vector<AgentAssignment> partition_seeds(std::size_t n_seeds, std::size_t n_agents, std::size_t sessions,
                                             const fs::path& merged_path);

enum class AgentMode {
    Thread,   // agents run on threads of this process
    Process,  // agents are child processes of agent_binary
};

struct CoordinatorOptions {
    AgentMode mode = AgentMode::Process;
    fs::path agent_binary;  // required in Process mode
    CrawlOptions crawl;     // Thread mode uses it as-is; Process mode forwards the plain fields
    // Test hook: agent_id -> number of seeds after which that agent dies.
    std::map<std::size_t, std::size_t> abort_after_seeds;
};

struct AgentOutcome {
    std::size_t agent_id = 0;
    bool ok = false;
    std::string error;
    CrawlSummary summary;
    std::vector<std::size_t> completed;    // seeds reported done
    std::vector<std::size_t> unprocessed;  // assigned but never reported
};

struct CoordinatorResult {
    fs::path merged_path;
    std::uint64_t merged_rows = 0;
    CrawlSummary summary;
    std::vector<AgentOutcome> agents;
    std::vector<std::size_t> unprocessed;

    bool all_ok() const;
    nlohmann::json to_json() const;
};

// Runs every assignment and merges the shards into merged_path in
// agent_id order. An agent failure does not stop the others; its
// unreported seeds end up in `unprocessed`.
CoordinatorResult run_agents(const std::vector<SeedProfile>& seeds, const std::vector<AgentAssignment>& assignments,
                             const CrawlConfig& config, const std::string& endpoint, const fs::path& merged_path,
                             const CoordinatorOptions& options);

// Concatenates raw shards (header once). Missing shards are skipped.
// Returns the number of data rows written.
std::uint64_t merge_shards(const std::vector<fs::path>& shards, const fs::path& merged_path);

// Framing helpers. read_message returns nullopt on a clean EOF.
void write_message(int fd, const nlohmann::json& message);
std::optional<nlohmann::json> read_message(int fd);

// Agent side: reads one start message from fd, crawls, reports, returns
// the process exit code.
int agent_main(int fd);

} // namespace imcrawler
