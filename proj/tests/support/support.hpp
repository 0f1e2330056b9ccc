#pragma once

// Test helpers. Oracles here read the flat truth tables, never the
// crawler's own data structures.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "imcrawler/config_io.hpp"
#include "imcrawler/csv.hpp"
#include "imcrawler/fixture/network.hpp"
#include "imcrawler/fixture/server.hpp"
#include "imcrawler/fixture/truth.hpp"
#include "imcrawler/pipeline/records.hpp"
#include "imcrawler/session.hpp"
#include "imcrawler/util.hpp"

namespace testing {

namespace fs = std::filesystem;
using namespace imcrawler;

class TempDir {
public:
    explicit TempDir(const std::string& tag = "t")
    {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("imcrawler-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

// A network served on an ephemeral local port for the lifetime of the object.
struct Served {
    std::shared_ptr<fixture::FixtureNetwork> network;
    std::unique_ptr<fixture::FixtureServer> server;

    explicit Served(fixture::FixtureNetwork net, fixture::ServeOptions options = {})
        : network(std::make_shared<fixture::FixtureNetwork>(std::move(net)))
    {
        server = std::make_unique<fixture::FixtureServer>(network, std::move(options));
        server->start("127.0.0.1", 0);
    }
    std::string endpoint() const { return server->endpoint(); }
};

inline fixture::FixtureNetwork make_network(std::size_t n, double mean_degree, std::uint64_t seed,
                                            double disclosure_rate = 0.6, std::int64_t posts_max = 12)
{
    fixture::GeneratorParams p;
    p.n_profiles = n;
    p.mean_degree = mean_degree;
    p.rng_seed = seed;
    p.disclosure_rate = disclosure_rate;
    p.posts_max = posts_max;
    return fixture::generate_network(p);
}

inline SeedProfile seed_for(const fixture::FixtureNetwork& net, const std::string& id)
{
    const auto& p = net.profile(id);
    return {p.profile_id, p.login_name, p.secret, std::nullopt};
}

// Column lookup over a table whose first row is the header.
struct Table {
    std::vector<std::string> header;
    std::vector<csv::Row> rows;

    explicit Table(const std::vector<csv::Row>& t) : header(t.at(0)), rows(t.begin() + 1, t.end()) {}
    std::size_t col(const std::string& name) const
    {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::runtime_error("no column " + name);
        return static_cast<std::size_t>(it - header.begin());
    }
};

// Friend lists in the order the adjacency table lists edges.
inline std::unordered_map<std::string, std::vector<std::string>> truth_adjacency(const fixture::TruthTables& t)
{
    std::unordered_map<std::string, std::vector<std::string>> adj;
    Table profiles(t.profiles);
    for (const auto& r : profiles.rows)
        adj[r[0]];
    for (std::size_t i = 1; i < t.adjacency.size(); ++i) {
        const auto& a = t.adjacency[i][0];
        const auto& b = t.adjacency[i][1];
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

// Reference traversal: one level at a time, parents in level order,
// neighbours in list order. Returns (node, depth) pairs.
inline std::vector<std::pair<std::string, std::size_t>>
oracle_bfs(const std::unordered_map<std::string, std::vector<std::string>>& adj, const std::vector<std::string>& start,
           std::size_t depth)
{
    std::set<std::string> seen(start.begin(), start.end());
    std::vector<std::string> level = start;
    std::vector<std::pair<std::string, std::size_t>> out;
    for (std::size_t d = 1; d <= depth && !level.empty(); ++d) {
        std::vector<std::string> next;
        for (const auto& u : level)
            for (const auto& v : adj.at(u))
                if (seen.insert(v).second)
                    next.push_back(v);
        for (const auto& v : next)
            out.emplace_back(v, d);
        level = std::move(next);
    }
    return out;
}

// Truth row keyed by profile id, as name -> cell.
inline std::map<std::string, std::map<std::string, std::string>> truth_profiles(const fixture::TruthTables& t)
{
    Table tab(t.profiles);
    std::map<std::string, std::map<std::string, std::string>> out;
    for (const auto& r : tab.rows) {
        auto& m = out[r[0]];
        for (std::size_t i = 0; i < tab.header.size(); ++i)
            m[tab.header[i]] = r[i];
    }
    return out;
}

// (profile_id, post_index) -> name -> cell.
inline std::map<std::pair<std::string, std::size_t>, std::map<std::string, std::string>>
truth_posts(const fixture::TruthTables& t)
{
    Table tab(t.posts);
    std::map<std::pair<std::string, std::size_t>, std::map<std::string, std::string>> out;
    for (const auto& r : tab.rows) {
        auto& m = out[{r[0], static_cast<std::size_t>(std::stoull(r[1]))}];
        for (std::size_t i = 0; i < tab.header.size(); ++i)
            m[tab.header[i]] = r[i];
    }
    return out;
}

inline const std::vector<std::string>& masked_columns()
{
    static const std::vector<std::string> cols = {"gender",   "birthday",     "email",          "phone",
                                                  "relationship_status", "hometown", "current_city",
                                                  "family_members", "pages_liked", "groups_joined"};
    return cols;
}

// Empty string when the record matches the truth row, otherwise a
// description of the first mismatch.
inline std::string profile_mismatch(const pipeline::ProfileRecord& rec,
                                    const std::map<std::string, std::string>& truth)
{
    const auto& cols = pipeline::profile_columns();
    auto row = pipeline::to_row(rec);
    auto cell = [&](const std::string& name) {
        return row[static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin())];
    };
    if (rec.profile_id != truth.at("profile_id"))
        return "profile_id " + rec.profile_id;
    if (cell("page_profile_id") != truth.at("profile_id"))
        return "page_profile_id " + cell("page_profile_id");
    if (cell("friend_count") != truth.at("friend_count"))
        return "friend_count " + cell("friend_count") + " != " + truth.at("friend_count");
    if (!rec.page_complete)
        return "page_complete";
    for (const auto& c : masked_columns()) {
        const bool disclosed = truth.at("disclosed_" + c) == "1";
        const std::string want = disclosed ? truth.at(c) : "NOT_DISCLOSED";
        if (cell(c) != want)
            return c + ": '" + cell(c) + "' != '" + want + "'";
    }
    return {};
}

inline std::string post_mismatch(const pipeline::PostRecord& rec, const std::map<std::string, std::string>& truth)
{
    const auto& cols = pipeline::post_columns();
    auto row = pipeline::to_row(rec);
    auto cell = [&](const std::string& name) {
        return row[static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin())];
    };
    for (const char* c : {"post_type", "title", "content", "date", "time", "comment_count", "share_count",
                          "reaction_total", "tags"})
        if (cell(c) != truth.at(c))
            return std::string(c) + ": '" + cell(c) + "' != '" + truth.at(c) + "'";
    const auto& views = truth.at("view_count");
    if (cell("view_count") != (views.empty() ? "NOT_PRESENT" : views))
        return "view_count " + cell("view_count");
    nlohmann::json emotions = nlohmann::json::object();
    for (auto kind : fixture::kReactionKinds) {
        auto n = std::stoll(truth.at("reactions_" + std::string(kind)));
        if (n > 0)
            emotions[std::string(kind)] = n;
    }
    if (nlohmann::json::parse(cell("emotion_counts")) != emotions)
        return "emotion_counts " + cell("emotion_counts");
    return {};
}

// Clock that only advances when something sleeps on it.
class VirtualClock final : public Clock {
public:
    time_point now() override
    {
        std::lock_guard lock(mutex_);
        return now_;
    }
    void sleep_for(std::chrono::milliseconds d) override
    {
        std::lock_guard lock(mutex_);
        now_ += d;
        sleeps_.push_back(d);
    }
    std::vector<std::chrono::milliseconds> sleeps()
    {
        std::lock_guard lock(mutex_);
        return sleeps_;
    }

private:
    std::mutex mutex_;
    time_point now_{};
    std::vector<std::chrono::milliseconds> sleeps_;
};

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

} // namespace testing
