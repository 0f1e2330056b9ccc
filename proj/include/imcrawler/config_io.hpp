#pragma once

// Seed file, crawl configuration and link-list files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "imcrawler/error.hpp"

namespace imcrawler {

namespace fs = std::filesystem;

class ConfigError : public Error {
public:
    enum class Kind {
        MissingFile,
        MalformedLine,
        DuplicateSeed,
        UnknownKey,
        BadValue,
        InconsistentPair,
        BadUrl,
        WriteFailure,
    };

    ConfigError(Kind kind, std::string detail, std::size_t line_no = 0);

    Kind kind() const noexcept { return kind_; }
    // Offending key, profile id or path depending on kind.
    const std::string& detail() const noexcept { return detail_; }
    std::size_t line_no() const noexcept { return line_no_; }

private:
    Kind kind_;
    std::string detail_;
    std::size_t line_no_;
};

struct SeedProfile {
    std::string profile_id;
    std::string login_name;
    std::string secret;
    std::optional<fs::path> friend_links_path;

    bool operator==(const SeedProfile&) const = default;
};

struct CrawlConfig {
    fs::path friend_links_path;
    fs::path output_path;
    std::int64_t total_post = 0;
    std::optional<fs::path> reextract_links_path;
    std::optional<std::int64_t> seed_profile_index;  // 1-based
    std::int64_t depth = 1;
    std::int64_t agents = 1;
    std::int64_t sessions_per_agent = 1;
    std::int64_t min_delay_ms = 200;
    std::int64_t max_delay_ms = 800;

    bool reextraction() const noexcept { return seed_profile_index.has_value(); }

    bool operator==(const CrawlConfig&) const = default;
};

struct LinkList {
    std::vector<std::string> urls;

    std::size_t size() const noexcept { return urls.size(); }
    bool empty() const noexcept { return urls.empty(); }
    bool operator==(const LinkList&) const = default;
};

// CSV rows `profile_id,login,secret`; blank lines and `#` comments skipped.
std::vector<SeedProfile> parse_seed_file(const fs::path& path);
void write_seed_file(const fs::path& path, const std::vector<SeedProfile>& seeds);

// `key=value` lines. Relative paths resolve against the file's directory
// and are stored absolute.
CrawlConfig parse_config(const fs::path& path);
CrawlConfig parse_config_text(const std::string& text, const fs::path& base_dir);

// Fully explicit `key=value` dump; parse_config of the dump reproduces `config`.
std::string dump_config(const CrawlConfig& config);

// Checks cross-file invariants (seed index in range).
void validate_against_seeds(const CrawlConfig& config, const std::vector<SeedProfile>& seeds);

// One URL per line; duplicates collapse to their first occurrence.
LinkList read_links_file(const fs::path& path);
void write_links_file(const fs::path& path, const LinkList& links);

// Appends with first-occurrence dedup, used when building lists in memory.
void append_unique(LinkList& list, const std::string& url);

} // namespace imcrawler
