#pragma once

// Seed-driven crawl: login, friend harvesting, breadth-first frontier,
// paced extraction, raw capture output.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "imcrawler/config_io.hpp"
#include "imcrawler/dom/rules.hpp"
#include "imcrawler/error.hpp"
#include "imcrawler/extract.hpp"
#include "imcrawler/session.hpp"

namespace imcrawler {

struct CrawlTask {
    std::string profile_url;
    std::size_t discovered_via = 0;  // seed index, 1-based
    std::size_t depth = 0;
    std::size_t attempt = 1;

    bool operator==(const CrawlTask&) const = default;
};

// Failure while expanding a frontier node; wraps the original message.
class FrontierError : public Error {
public:
    FrontierError(std::string profile_url, const std::string& cause);
    const std::string& profile_url() const noexcept { return profile_url_; }

private:
    std::string profile_url_;
};

// Thread-safe membership set; insert() reports whether the key was new.
class VisitedSet {
public:
    bool insert(const std::string& key);
    bool contains(const std::string& key) const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::unordered_set<std::string> keys_;
};

using NeighborFn = std::function<LinkList(const std::string&)>;

// Every node within `depth` hops of a start node, start nodes excluded,
// level by level in FIFO discovery order. Throws FrontierError when
// neighbor_fn throws.
std::vector<CrawlTask> bfs_frontier(const std::vector<std::string>& start, const NeighborFn& neighbor_fn,
                                    std::size_t depth, std::size_t discovered_via = 0);

inline constexpr std::string_view kRawHeader = "capture_kind,profile_url,seed_index,field,value,captured_at";

struct RawRow {
    std::string capture_kind;  // profile | post
    std::string profile_url;
    std::size_t seed_index = 0;
    std::string field;
    std::string value;
    std::string captured_at;
};

std::vector<RawRow> raw_rows(const RawProfileCapture& profile, const std::vector<RawPostCapture>& posts);

// Append-only CSV writer for raw captures. Rows belonging to one profile
// are written under a single lock, so concurrent writers never interleave.
class RawSink {
public:
    explicit RawSink(const fs::path& path);
    void append(const std::vector<RawRow>& rows);
    std::uint64_t rows_written() const;

private:
    mutable std::mutex mutex_;
    std::ofstream out_;
    fs::path path_;
    std::uint64_t rows_ = 0;
};

struct SeedSummary {
    std::size_t seed_index = 0;
    std::string profile_id;
    bool logged_in = false;
    std::string login_error;
    std::uint64_t tasks = 0;
    std::uint64_t captured = 0;
    std::uint64_t posts = 0;
    std::uint64_t errors = 0;

    bool operator==(const SeedSummary&) const = default;
};

struct CrawlSummary {
    std::uint64_t profiles_attempted = 0;
    std::uint64_t profiles_captured = 0;
    std::uint64_t posts_captured = 0;
    std::uint64_t fetch_errors = 0;
    std::uint64_t logins = 0;
    std::uint64_t logouts = 0;
    std::int64_t duration_ms = 0;
    std::vector<SeedSummary> per_seed;  // ordered by seed_index
    std::vector<std::string> failed_urls;

    void merge(const CrawlSummary& other);
    nlohmann::json to_json() const;
    static CrawlSummary from_json(const nlohmann::json& j);
};

struct CrawlOptions {
    const dom::RuleSet* rules = nullptr;  // defaults to RuleSet::defaults()
    Clock* clock = nullptr;               // defaults to SystemClock
    FetchObserver observer;
    std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(4)};
    std::size_t max_attempts = 3;
    std::uint64_t pacing_seed = 0;
    std::chrono::seconds timeout{10};
    // Called after each seed finishes, from the worker that ran it.
    std::function<void(const SeedSummary&)> on_seed_done;
    const std::atomic<bool>* cancel = nullptr;
};

// Crawls the seeds at `seed_indices` (1-based into all_seeds). In
// re-extraction mode the indices are ignored and only the configured seed
// runs. Throws ConfigError on invalid input and Error{Auth,
// AllSeedsFailedLogin} when no seed could log in.
CrawlSummary crawl(const std::vector<SeedProfile>& all_seeds, const std::vector<std::size_t>& seed_indices,
                   const CrawlConfig& config, const std::string& endpoint, const CrawlOptions& options = {});

// Convenience overload crawling every seed.
CrawlSummary crawl(const std::vector<SeedProfile>& seeds, const CrawlConfig& config, const std::string& endpoint,
                   const CrawlOptions& options = {});

// Canonical profile URL for a profile id on an endpoint.
std::string profile_url_for(const std::string& endpoint, const std::string& profile_id);

} // namespace imcrawler
