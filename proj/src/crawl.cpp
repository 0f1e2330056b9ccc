#include "imcrawler/crawl.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "imcrawler/csv.hpp"
#include "imcrawler/url.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler {

FrontierError::FrontierError(std::string profile_url, const std::string& cause)
    : Error(ErrorCategory::Fetch, "FrontierError", fmt::format("expanding {}: {}", profile_url, cause)),
      profile_url_(std::move(profile_url))
{
}

bool VisitedSet::insert(const std::string& key)
{
    std::lock_guard lock(mutex_);
    return keys_.insert(key).second;
}

bool VisitedSet::contains(const std::string& key) const
{
    std::lock_guard lock(mutex_);
    return keys_.count(key) > 0;
}

std::size_t VisitedSet::size() const
{
    std::lock_guard lock(mutex_);
    return keys_.size();
}

std::vector<CrawlTask> bfs_frontier(const std::vector<std::string>& start, const NeighborFn& neighbor_fn,
                                    std::size_t depth, std::size_t discovered_via)
{
    std::vector<CrawlTask> tasks;
    VisitedSet visited;
    std::vector<std::string> level;
    for (const auto& s : start)
        if (visited.insert(s))
            level.push_back(s);

    for (std::size_t d = 1; d <= depth && !level.empty(); ++d) {
        std::vector<std::string> next;
        for (const auto& node : level) {
            LinkList neighbors;
            try {
                neighbors = neighbor_fn(node);
            } catch (const FrontierError&) {
                throw;
            } catch (const std::exception& e) {
                throw FrontierError(node, e.what());
            }
            for (const auto& url : neighbors.urls) {
                if (!visited.insert(url))
                    continue;
                tasks.push_back({url, discovered_via, d, 1});
                next.push_back(url);
            }
        }
        level = std::move(next);
    }
    return tasks;
}

std::vector<RawRow> raw_rows(const RawProfileCapture& profile, const std::vector<RawPostCapture>& posts)
{
    std::vector<RawRow> rows;
    rows.reserve(profile.fields.size() + posts.size() * post_field_names().size());
    for (const auto& f : profile.fields)
        rows.push_back({"profile", profile.profile_url, profile.seed_index, f.name, f.value, profile.captured_at});
    for (const auto& post : posts)
        for (const auto& f : post.fields)
            rows.push_back({"post", post.profile_url, post.seed_index, fmt::format("{}.{}", post.post_index, f.name),
                            f.value, post.captured_at});
    return rows;
}

RawSink::RawSink(const fs::path& path) : path_(path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_)
        throw Error(ErrorCategory::Io, "WriteFailure", "cannot open raw output " + path.string());
    if (fresh) {
        out_ << kRawHeader << '\n';
        out_.flush();
    }
}

void RawSink::append(const std::vector<RawRow>& rows)
{
    std::string block;
    for (const auto& r : rows)
        block += csv::format_row({r.capture_kind, r.profile_url, std::to_string(r.seed_index), r.field, r.value,
                                  r.captured_at});
    std::lock_guard lock(mutex_);
    out_ << block;
    out_.flush();
    if (!out_)
        throw Error(ErrorCategory::Io, "WriteFailure", "cannot append to " + path_.string());
    rows_ += rows.size();
}

std::uint64_t RawSink::rows_written() const
{
    std::lock_guard lock(mutex_);
    return rows_;
}

void CrawlSummary::merge(const CrawlSummary& other)
{
    profiles_attempted += other.profiles_attempted;
    profiles_captured += other.profiles_captured;
    posts_captured += other.posts_captured;
    fetch_errors += other.fetch_errors;
    logins += other.logins;
    logouts += other.logouts;
    duration_ms = std::max(duration_ms, other.duration_ms);
    per_seed.insert(per_seed.end(), other.per_seed.begin(), other.per_seed.end());
    std::stable_sort(per_seed.begin(), per_seed.end(),
                     [](const SeedSummary& a, const SeedSummary& b) { return a.seed_index < b.seed_index; });
    failed_urls.insert(failed_urls.end(), other.failed_urls.begin(), other.failed_urls.end());
}

nlohmann::json CrawlSummary::to_json() const
{
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& s : per_seed)
        seeds.push_back({{"seed_index", s.seed_index},
                         {"profile_id", s.profile_id},
                         {"logged_in", s.logged_in},
                         {"login_error", s.login_error},
                         {"tasks", s.tasks},
                         {"captured", s.captured},
                         {"posts", s.posts},
                         {"errors", s.errors}});
    return {{"profiles_attempted", profiles_attempted},
            {"profiles_captured", profiles_captured},
            {"posts_captured", posts_captured},
            {"fetch_errors", fetch_errors},
            {"logins", logins},
            {"logouts", logouts},
            {"duration_ms", duration_ms},
            {"per_seed", seeds},
            {"failed_urls", failed_urls}};
}

CrawlSummary CrawlSummary::from_json(const nlohmann::json& j)
{
    CrawlSummary s;
    s.profiles_attempted = j.at("profiles_attempted").get<std::uint64_t>();
    s.profiles_captured = j.at("profiles_captured").get<std::uint64_t>();
    s.posts_captured = j.at("posts_captured").get<std::uint64_t>();
    s.fetch_errors = j.at("fetch_errors").get<std::uint64_t>();
    s.logins = j.value("logins", std::uint64_t{0});
    s.logouts = j.value("logouts", std::uint64_t{0});
    s.duration_ms = j.value("duration_ms", std::int64_t{0});
    for (const auto& e : j.value("per_seed", nlohmann::json::array())) {
        SeedSummary seed;
        seed.seed_index = e.at("seed_index").get<std::size_t>();
        seed.profile_id = e.at("profile_id").get<std::string>();
        seed.logged_in = e.at("logged_in").get<bool>();
        seed.login_error = e.value("login_error", "");
        seed.tasks = e.at("tasks").get<std::uint64_t>();
        seed.captured = e.at("captured").get<std::uint64_t>();
        seed.posts = e.at("posts").get<std::uint64_t>();
        seed.errors = e.at("errors").get<std::uint64_t>();
        s.per_seed.push_back(std::move(seed));
    }
    s.failed_urls = j.value("failed_urls", std::vector<std::string>{});
    return s;
}

std::string profile_url_for(const std::string& endpoint, const std::string& profile_id)
{
    auto base = parse_url(endpoint);
    if (!base)
        throw ConfigError(ConfigError::Kind::BadUrl, endpoint);
    auto url = normalize_profile_url(base->origin() + "/profile/" + profile_id);
    if (!url)
        throw ConfigError(ConfigError::Kind::BadUrl, profile_id);
    return *url;
}

namespace {

// Shared state of one crawl() call.
struct CrawlContext {
    const std::vector<SeedProfile>& seeds;
    const CrawlConfig& config;
    const std::string& endpoint;
    const CrawlOptions& options;
    const dom::RuleSet& rules;
    Clock& clock;
    RawSink sink;
    std::optional<LinkList> reextract;

    std::mutex links_mutex;
    std::ofstream links_out;

    std::mutex summary_mutex;
    CrawlSummary summary;

    bool cancelled() const { return options.cancel && options.cancel->load(); }
};

// One seed's session plus the retry/relogin policy around it.
class SeedRunner {
public:
    SeedRunner(CrawlContext& ctx, std::size_t seed_index)
        : ctx_(ctx), seed_(ctx.seeds.at(seed_index - 1)), seed_index_(seed_index)
    {
        stats_.seed_index = seed_index;
        stats_.profile_id = seed_.profile_id;
    }

    ~SeedRunner() { close(); }

    SeedSummary run()
    {
        if (!open()) {
            close();
            return stats_;
        }
        stats_.logged_in = true;

        std::vector<CrawlTask> tasks;
        if (ctx_.reextract) {
            for (const auto& url : ctx_.reextract->urls)
                tasks.push_back({url, seed_index_, 0, 1});
        } else {
            auto seed_url = profile_url_for(ctx_.endpoint, seed_.profile_id);
            NeighborFn neighbors = [&](const std::string& url) {
                auto links = with_retry(url, [&](Session& s) { return extract_friend_links(s, url, ctx_.rules); });
                if (!links) {
                    ++stats_.errors;
                    return LinkList{};
                }
                return *links;
            };
            tasks = bfs_frontier({seed_url}, neighbors, static_cast<std::size_t>(ctx_.config.depth), seed_index_);
            persist_links(tasks);
        }

        for (const auto& task : tasks) {
            if (ctx_.cancelled())
                break;
            ++stats_.tasks;
            auto captured = with_retry(task.profile_url, [&](Session& s) {
                auto profile = extract_personal_attributes(s, task.profile_url, ctx_.rules);
                auto posts = extract_post_attributes(s, task.profile_url, ctx_.config.total_post, ctx_.rules);
                return std::make_pair(std::move(profile), std::move(posts));
            });
            if (!captured) {
                ++stats_.errors;
                failed_urls_.push_back(task.profile_url);
                continue;
            }
            ctx_.sink.append(raw_rows(captured->first, captured->second));
            ++stats_.captured;
            stats_.posts += captured->second.size();
        }
        close();
        return stats_;
    }

    std::uint64_t logins() const { return logins_; }
    std::uint64_t logouts() const { return logouts_; }
    const std::vector<std::string>& failed_urls() const { return failed_urls_; }

private:
    SessionOptions session_options() const
    {
        SessionOptions o;
        o.min_delay_ms = ctx_.config.min_delay_ms;
        o.max_delay_ms = ctx_.config.max_delay_ms;
        o.pacing_seed = ctx_.options.pacing_seed + logins_;
        o.clock = &ctx_.clock;
        o.observer = ctx_.options.observer;
        o.timeout = ctx_.options.timeout;
        return o;
    }

    void backoff(std::size_t attempt)
    {
        const auto& steps = ctx_.options.backoff;
        if (attempt < 2 || steps.empty())
            return;
        ctx_.clock.sleep_for(steps[std::min(attempt - 2, steps.size() - 1)]);
    }

    bool open()
    {
        for (std::size_t attempt = 1; attempt <= ctx_.options.max_attempts; ++attempt) {
            backoff(attempt);
            try {
                session_.emplace(Session::login(seed_, seed_index_, ctx_.endpoint, session_options()));
                ++logins_;
                return true;
            } catch (const BadCredentials& e) {
                stats_.login_error = e.what();
                return false;
            } catch (const Error& e) {
                stats_.login_error = e.what();
                spdlog::warn("seed {} login attempt {} failed: {}", seed_index_, attempt, e.what());
            }
        }
        return false;
    }

    void close()
    {
        if (session_ && session_->live()) {
            try {
                session_->logout();
            } catch (const std::exception& e) {
                spdlog::warn("seed {} logout failed: {}", seed_index_, e.what());
            }
            ++logouts_;
        }
        session_.reset();
    }

    template <class Fn>
    auto with_retry(const std::string& url, Fn&& fn) -> std::optional<decltype(fn(std::declval<Session&>()))>
    {
        for (std::size_t attempt = 1; attempt <= ctx_.options.max_attempts; ++attempt) {
            backoff(attempt);
            if (!session_ || !session_->live()) {
                close();
                if (!open())
                    return std::nullopt;
            }
            try {
                return fn(*session_);
            } catch (const AuthExpired& e) {
                spdlog::info("seed {} session expired on {}; logging in again", seed_index_, url);
                session_->invalidate_local_token();
                session_.reset();
            } catch (const Error& e) {
                spdlog::warn("seed {} attempt {} on {} failed: {}", seed_index_, attempt, url, e.what());
            }
        }
        return std::nullopt;
    }

    void persist_links(const std::vector<CrawlTask>& tasks)
    {
        std::string block;
        for (const auto& t : tasks)
            block += t.profile_url + "\n";
        std::lock_guard lock(ctx_.links_mutex);
        ctx_.links_out << block;
        ctx_.links_out.flush();
    }

    CrawlContext& ctx_;
    const SeedProfile& seed_;
    std::size_t seed_index_;
    std::optional<Session> session_;
    SeedSummary stats_;
    std::uint64_t logins_ = 0;
    std::uint64_t logouts_ = 0;
    std::vector<std::string> failed_urls_;
};

} // namespace

CrawlSummary crawl(const std::vector<SeedProfile>& all_seeds, const std::vector<std::size_t>& seed_indices,
                   const CrawlConfig& config, const std::string& endpoint, const CrawlOptions& options)
{
    auto started = std::chrono::steady_clock::now();
    validate_against_seeds(config, all_seeds);
    if (config.total_post < 1)
        throw ConfigError(ConfigError::Kind::BadValue, "totalPost");
    if (config.depth < 1)
        throw ConfigError(ConfigError::Kind::BadValue, "depth");
    if (!parse_url(endpoint))
        throw ConfigError(ConfigError::Kind::BadUrl, endpoint);

    std::vector<std::size_t> indices;
    if (config.reextraction()) {
        indices.push_back(static_cast<std::size_t>(*config.seed_profile_index));
    } else {
        for (auto i : seed_indices) {
            if (i < 1 || i > all_seeds.size())
                throw ConfigError(ConfigError::Kind::BadValue, fmt::format("seed index {}", i));
            indices.push_back(i);
        }
    }

    CrawlContext ctx{all_seeds,
                     config,
                     endpoint,
                     options,
                     options.rules ? *options.rules : dom::RuleSet::defaults(),
                     options.clock ? *options.clock : SystemClock::instance(),
                     RawSink(config.output_path),
                     std::nullopt,
                     {},
                     {},
                     {},
                     {}};
    if (config.reextraction()) {
        ctx.reextract = read_links_file(*config.reextract_links_path);
    } else {
        const auto& links_path = config.friend_links_path;
        if (links_path.has_parent_path())
            fs::create_directories(links_path.parent_path());
        ctx.links_out.open(links_path, std::ios::binary | std::ios::trunc);
        if (!ctx.links_out)
            throw ConfigError(ConfigError::Kind::WriteFailure, links_path.string());
    }

    auto n_workers = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(std::max<std::int64_t>(1, config.sessions_per_agent)),
                                 indices.size()));

    auto worker = [&](std::size_t w) {
        for (std::size_t k = w; k < indices.size(); k += n_workers) {
            if (ctx.cancelled())
                break;
            SeedRunner runner(ctx, indices[k]);
            auto stats = runner.run();
            {
                std::lock_guard lock(ctx.summary_mutex);
                auto& s = ctx.summary;
                s.profiles_attempted += stats.tasks;
                s.profiles_captured += stats.captured;
                s.posts_captured += stats.posts;
                s.fetch_errors += stats.errors;
                s.logins += runner.logins();
                s.logouts += runner.logouts();
                s.per_seed.push_back(stats);
                s.failed_urls.insert(s.failed_urls.end(), runner.failed_urls().begin(), runner.failed_urls().end());
            }
            if (options.on_seed_done)
                options.on_seed_done(stats);
        }
    };

    if (n_workers == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (std::size_t w = 0; w < n_workers; ++w)
            threads.emplace_back([&, w] {
                try {
                    worker(w);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            });
        for (auto& t : threads)
            t.join();
        if (failure)
            std::rethrow_exception(failure);
    }

    auto& summary = ctx.summary;
    std::stable_sort(summary.per_seed.begin(), summary.per_seed.end(),
                     [](const SeedSummary& a, const SeedSummary& b) { return a.seed_index < b.seed_index; });
    summary.duration_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

    bool any_login = std::any_of(summary.per_seed.begin(), summary.per_seed.end(),
                                 [](const SeedSummary& s) { return s.logged_in; });
    if (!summary.per_seed.empty() && !any_login)
        throw Error(ErrorCategory::Auth, "AllSeedsFailedLogin",
                    fmt::format("none of {} seeds could log in: {}", summary.per_seed.size(),
                                summary.per_seed.front().login_error));
    return summary;
}

CrawlSummary crawl(const std::vector<SeedProfile>& seeds, const CrawlConfig& config, const std::string& endpoint,
                   const CrawlOptions& options)
{
    std::vector<std::size_t> indices(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i)
        indices[i] = i + 1;
    return crawl(seeds, indices, config, endpoint, options);
}

} // namespace imcrawler
