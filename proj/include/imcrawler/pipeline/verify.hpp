#pragma once

// Record verification and the re-extraction list.
//
// Checks, in report order:
//   profile_id_present        page carries an id equal to the URL's id
//   friend_count_parseable
//   sections_complete         every profile section parsed or NOT_DISCLOSED
//   page_complete             the page end marker was captured
//   posts_within_limit        no post index beyond total_post
//   posts_complete            no post field MISSING
//   no_unparseable            no UNPARSEABLE value in the profile or its posts
//   reaction_total_consistent reaction total equals the sum of emotions (advisory)

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "imcrawler/pipeline/records.hpp"

namespace imcrawler::pipeline {

const std::vector<std::string>& check_names();
const std::set<std::string>& default_required_checks();

struct VerificationPolicy {
    std::int64_t total_post = 0;  // 0 disables posts_within_limit
    std::set<std::string> required = default_required_checks();
};

struct CheckResult {
    std::string name;
    bool passed = true;
    bool required = true;
    std::string detail;
};

enum class Verdict { Ok, Junk };

struct VerificationReport {
    std::string profile_id;
    std::string profile_url;
    std::size_t seed_index = 0;
    std::vector<CheckResult> checks;
    Verdict verdict = Verdict::Ok;

    bool junk() const noexcept { return verdict == Verdict::Junk; }
};

// One report per profile record, in record order. Posts are matched to a
// profile capture by (profile_id, seed_index). Never throws on bad data.
std::vector<VerificationReport> verify(const Structured& data, const VerificationPolicy& policy);

// Report CSV: profile_id,profile_url,seed_index,verdict,failed_required,failed_advisory,detail
void write_reports(const fs::path& path, const std::vector<VerificationReport>& reports);
// Reads the CSV back; only failed checks are restored.
std::vector<VerificationReport> read_reports(const fs::path& path);

// Writes the URLs of junk profiles, first occurrence order, in the friend
// links format. Returns the number of URLs written.
std::size_t emit_reextract_list(const std::vector<VerificationReport>& reports, const fs::path& out_path);

} // namespace imcrawler::pipeline
