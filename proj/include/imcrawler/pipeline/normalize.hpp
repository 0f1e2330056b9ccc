#pragma once

// Raw capture file -> structured records.

#include <filesystem>
#include <istream>

#include "imcrawler/pipeline/records.hpp"

namespace imcrawler::pipeline {

// Reads the crawl's raw CSV. Markup is stripped and typed fields parsed;
// values that fail to parse are kept as Unparseable. Rows that cannot be
// placed in any record land in `skipped` with their line number, so
// raw_rows == consumed_rows + skipped.size() always holds.
Structured normalize_raw(const fs::path& raw_path);
Structured normalize_raw(std::istream& in);

} // namespace imcrawler::pipeline
