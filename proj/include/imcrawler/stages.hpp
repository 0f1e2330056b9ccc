#pragma once

// One function per workflow step, shared by the CLI subcommands and the
// demo. Each writes its outputs plus `<primary output>.manifest.json`.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imcrawler/config_io.hpp"
#include "imcrawler/coordinator.hpp"
#include "imcrawler/fixture/network.hpp"
#include "imcrawler/pipeline/records.hpp"
#include "imcrawler/pipeline/store.hpp"
#include "imcrawler/pipeline/verify.hpp"

namespace imcrawler {

fs::path manifest_path(const fs::path& primary_output);

// Stamps started_at/duration_ms/exit_code onto `manifest` and writes it.
void write_manifest(const fs::path& primary_output, nlohmann::json manifest,
                    std::chrono::steady_clock::time_point started, int exit_code);

fixture::FixtureNetwork stage_generate(const fixture::GeneratorParams& params, const fs::path& out,
                                       const std::optional<fs::path>& truth_dir = std::nullopt);

// `count` distinct profiles with at least one friend, chosen by `seed`.
std::vector<SeedProfile> stage_seeds(const fixture::FixtureNetwork& network, std::size_t count, std::uint64_t seed,
                                     const fs::path& out);

void stage_truth(const fixture::FixtureNetwork& network, const fs::path& out_dir);

pipeline::Structured stage_normalize(const fs::path& raw, const fs::path& out_dir);

struct VerifyOutcome {
    std::vector<pipeline::VerificationReport> reports;
    std::size_t junk = 0;        // junk reports
    std::size_t reextract = 0;   // URLs written to the re-extraction list
};
VerifyOutcome stage_verify(const fs::path& in_dir, const fs::path& report, const fs::path& reextract_out,
                           const pipeline::VerificationPolicy& policy);

pipeline::LoadReport stage_load(const fs::path& in_dir, const fs::path& db,
                                const std::optional<fs::path>& report = std::nullopt);

std::vector<pipeline::ProfileRecord> stage_filter(const fs::path& db, const std::vector<std::string>& cities,
                                                  const fs::path& out);

// Population: profile ids from the first column of a profiles CSV, or
// every stored profile when absent.
nlohmann::json stage_stats(const fs::path& db, const std::optional<fs::path>& population, const fs::path& out);

} // namespace imcrawler
