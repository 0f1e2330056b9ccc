#pragma once

// Flat ground-truth export of a fixture network: profiles, posts and
// adjacency tables keyed by profile id.

#include <filesystem>
#include <vector>

#include "imcrawler/csv.hpp"
#include "imcrawler/fixture/network.hpp"

namespace imcrawler::fixture {

struct TruthTables {
    // Each table starts with its header row.
    std::vector<csv::Row> profiles;
    std::vector<csv::Row> posts;
    std::vector<csv::Row> adjacency;

    bool operator==(const TruthTables&) const = default;
};

TruthTables ground_truth(const FixtureNetwork& network);

// Writes profiles.csv, posts.csv and adjacency.csv into `dir`.
void write_truth(const TruthTables& tables, const std::filesystem::path& dir);
TruthTables read_truth(const std::filesystem::path& dir);

// Rebuilds nodes and edges from the tables. Generator parameters are not
// part of the export.
FixtureNetwork network_from_truth(const TruthTables& tables);

} // namespace imcrawler::fixture
