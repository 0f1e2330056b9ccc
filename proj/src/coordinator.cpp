#include "imcrawler/coordinator.hpp"

#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "imcrawler/csv.hpp"

extern char** environ;

namespace imcrawler {

namespace {

constexpr std::uint32_t kMaxMessage = 64u << 20;

Error agent_error(const std::string& code, const std::string& message)
{
    return Error(ErrorCategory::Agent, code, message);
}

void write_all(int fd, const char* data, std::size_t size)
{
    while (size > 0) {
        auto n = ::send(fd, data, size, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw agent_error("ChannelClosed", std::string("control write failed: ") + std::strerror(errno));
        }
        data += n;
        size -= static_cast<std::size_t>(n);
    }
}

// false on EOF before the first byte; throws on EOF mid-buffer.
bool read_all(int fd, char* data, std::size_t size)
{
    std::size_t got = 0;
    while (got < size) {
        auto n = ::read(fd, data + got, size - got);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw agent_error("ChannelClosed", std::string("control read failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (got == 0)
                return false;
            throw agent_error("ChannelClosed", "truncated control message");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

nlohmann::json seeds_to_json(const std::vector<SeedProfile>& seeds)
{
    auto out = nlohmann::json::array();
    for (const auto& s : seeds)
        out.push_back({{"profile_id", s.profile_id}, {"login", s.login_name}, {"secret", s.secret}});
    return out;
}

std::vector<SeedProfile> seeds_from_json(const nlohmann::json& j)
{
    std::vector<SeedProfile> seeds;
    for (const auto& e : j)
        seeds.push_back({e.at("profile_id").get<std::string>(), e.at("login").get<std::string>(),
                         e.at("secret").get<std::string>(), std::nullopt});
    return seeds;
}

CrawlConfig agent_config(const CrawlConfig& config, const AgentAssignment& a)
{
    CrawlConfig c = config;
    c.output_path = a.shard_path;
    c.friend_links_path = config.friend_links_path.string() + fmt::format(".agent-{}", a.agent_id);
    c.sessions_per_agent = static_cast<std::int64_t>(a.sessions);
    return c;
}

nlohmann::json start_message(const std::vector<SeedProfile>& seeds, const AgentAssignment& a,
                             const CrawlConfig& config, const std::string& endpoint, const CoordinatorOptions& opts)
{
    nlohmann::json backoff = nlohmann::json::array();
    for (auto d : opts.crawl.backoff)
        backoff.push_back(d.count());
    nlohmann::json msg = {{"cmd", "start"},
                          {"agent_id", a.agent_id},
                          {"seed_indices", a.seed_indices},
                          {"seeds", seeds_to_json(seeds)},
                          {"config_blob", dump_config(agent_config(config, a))},
                          {"endpoint", endpoint},
                          {"backoff_ms", backoff},
                          {"max_attempts", opts.crawl.max_attempts},
                          {"pacing_seed", opts.crawl.pacing_seed}};
    if (auto it = opts.abort_after_seeds.find(a.agent_id); it != opts.abort_after_seeds.end())
        msg["fault"] = {{"abort_after_seeds", it->second}};
    return msg;
}

struct AgentAbort {};

// Shared by thread and process agents. `base` carries in-process hooks
// (clock, observer, rules) that cannot cross a process boundary.
int run_agent(int fd, const CrawlOptions* base, bool hard_abort)
{
    std::optional<nlohmann::json> start;
    try {
        start = read_message(fd);
    } catch (const std::exception& e) {
        spdlog::error("agent: {}", e.what());
        return 1;
    }
    if (!start || start->value("cmd", "") != "start") {
        spdlog::error("agent: expected a start message");
        return 1;
    }
    std::mutex write_mutex;
    auto send = [&](const nlohmann::json& m) {
        std::lock_guard lock(write_mutex);
        write_message(fd, m);
    };

    try {
        const auto& msg = *start;
        auto seeds = seeds_from_json(msg.at("seeds"));
        auto indices = msg.at("seed_indices").get<std::vector<std::size_t>>();
        auto config = parse_config_text(msg.at("config_blob").get<std::string>(), "/");
        auto endpoint = msg.at("endpoint").get<std::string>();

        CrawlOptions options = base ? *base : CrawlOptions{};
        options.backoff.clear();
        for (auto ms : msg.value("backoff_ms", std::vector<std::int64_t>{}))
            options.backoff.emplace_back(ms);
        options.max_attempts = msg.value("max_attempts", std::size_t{3});
        options.pacing_seed = msg.value("pacing_seed", std::uint64_t{0});

        std::atomic<bool> cancel{false};
        options.cancel = &cancel;
        std::size_t abort_after = 0;
        if (msg.contains("fault"))
            abort_after = msg["fault"].value("abort_after_seeds", std::size_t{0});
        std::atomic<std::size_t> done{0};
        auto outer = options.on_seed_done;
        options.on_seed_done = [&](const SeedSummary& s) {
            if (outer)
                outer(s);
            send({{"status", "progress"}, {"seed_index", s.seed_index}});
            if (abort_after && ++done >= abort_after) {
                if (hard_abort)
                    ::_exit(3);
                cancel = true;
                throw AgentAbort{};
            }
        };

        auto summary = crawl(seeds, indices, config, endpoint, options);
        send({{"status", "done"}, {"summary", summary.to_json()}});
        return 0;
    } catch (const AgentAbort&) {
        return 3;
    } catch (const Error& e) {
        try {
            send({{"status", "failed"},
                  {"category", std::string(category_name(e.category()))},
                  {"code", e.code()},
                  {"error", e.what()}});
        } catch (...) {
        }
        return 1;
    } catch (const std::exception& e) {
        try {
            send({{"status", "failed"}, {"category", "AGENT"}, {"code", "AgentFailure"}, {"error", e.what()}});
        } catch (...) {
        }
        return 1;
    }
}

// Reads an agent's reports until EOF.
void collect(int fd, AgentOutcome& outcome)
{
    bool finished = false;
    try {
        while (auto m = read_message(fd)) {
            auto status = m->value("status", "");
            if (status == "progress") {
                outcome.completed.push_back(m->at("seed_index").get<std::size_t>());
            } else if (status == "done") {
                outcome.summary = CrawlSummary::from_json(m->at("summary"));
                outcome.ok = true;
                finished = true;
            } else if (status == "failed") {
                outcome.error = m->value("code", "AgentFailure") + ": " + m->value("error", "");
                finished = true;
            }
        }
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
        return;
    }
    if (!finished)
        outcome.error = "agent exited without reporting";
}

} // namespace

std::vector<AgentAssignment> partition_seeds(std::size_t n_seeds, std::size_t n_agents, std::size_t sessions,
                                             const fs::path& merged_path)
{
    n_agents = std::max<std::size_t>(1, n_agents);
    std::vector<AgentAssignment> out(n_agents);
    for (std::size_t a = 0; a < n_agents; ++a) {
        out[a].agent_id = a;
        out[a].sessions = std::max<std::size_t>(1, sessions);
        out[a].shard_path = merged_path.string() + fmt::format(".shard-{}.csv", a);
    }
    for (std::size_t k = 0; k < n_seeds; ++k)
        out[k % n_agents].seed_indices.push_back(k + 1);
    return out;
}

void write_message(int fd, const nlohmann::json& message)
{
    auto body = message.dump();
    if (body.size() > kMaxMessage)
        throw agent_error("MessageTooLarge", fmt::format("{} byte control message", body.size()));
    auto n = static_cast<std::uint32_t>(body.size());
    char header[4] = {static_cast<char>(n >> 24), static_cast<char>(n >> 16), static_cast<char>(n >> 8),
                      static_cast<char>(n)};
    write_all(fd, header, 4);
    write_all(fd, body.data(), body.size());
}

std::optional<nlohmann::json> read_message(int fd)
{
    unsigned char header[4];
    if (!read_all(fd, reinterpret_cast<char*>(header), 4))
        return std::nullopt;
    std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                      (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
    if (n > kMaxMessage)
        throw agent_error("MessageTooLarge", fmt::format("{} byte control message", n));
    std::string body(n, '\0');
    if (n && !read_all(fd, body.data(), n))
        throw agent_error("ChannelClosed", "truncated control message");
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw agent_error("BadMessage", e.what());
    }
}

int agent_main(int fd)
{
    auto code = run_agent(fd, nullptr, true);
    ::close(fd);
    return code;
}

std::uint64_t merge_shards(const std::vector<fs::path>& shards, const fs::path& merged_path)
{
    if (merged_path.has_parent_path())
        fs::create_directories(merged_path.parent_path());
    std::ofstream out(merged_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCategory::Io, "WriteFailure", "cannot write " + merged_path.string());
    csv::Writer writer(out);
    out << kRawHeader << '\n';
    std::uint64_t rows = 0;
    for (const auto& shard : shards) {
        std::ifstream in(shard, std::ios::binary);
        if (!in)
            continue;
        csv::Reader reader(in);
        csv::Row row;
        bool first = true;
        while (reader.next(row)) {
            if (first) {
                first = false;
                if (csv::format_row(row) == std::string(kRawHeader) + "\n")
                    continue;
            }
            writer.write(row);
            ++rows;
        }
    }
    out.flush();
    if (!out)
        throw Error(ErrorCategory::Io, "WriteFailure", "cannot write " + merged_path.string());
    return rows;
}

bool CoordinatorResult::all_ok() const
{
    return std::all_of(agents.begin(), agents.end(), [](const AgentOutcome& a) { return a.ok; });
}

nlohmann::json CoordinatorResult::to_json() const
{
    auto agents_json = nlohmann::json::array();
    for (const auto& a : agents)
        agents_json.push_back({{"agent_id", a.agent_id},
                               {"ok", a.ok},
                               {"error", a.error},
                               {"completed", a.completed},
                               {"unprocessed", a.unprocessed},
                               {"summary", a.summary.to_json()}});
    return {{"merged_path", merged_path.string()},
            {"merged_rows", merged_rows},
            {"summary", summary.to_json()},
            {"agents", agents_json},
            {"unprocessed", unprocessed}};
}

CoordinatorResult run_agents(const std::vector<SeedProfile>& seeds, const std::vector<AgentAssignment>& assignments,
                             const CrawlConfig& config, const std::string& endpoint, const fs::path& merged_path,
                             const CoordinatorOptions& options)
{
    validate_against_seeds(config, seeds);
    if (options.mode == AgentMode::Process && options.agent_binary.empty())
        throw Error(ErrorCategory::Usage, "MissingAgentBinary", "process mode needs the agent binary path");

    CoordinatorResult result;
    result.merged_path = merged_path;
    result.agents.resize(assignments.size());

    struct Running {
        int host_fd = -1;
        pid_t pid = -1;
        std::thread agent_thread;
        std::thread reader;
    };
    std::vector<Running> running(assignments.size());

    for (std::size_t i = 0; i < assignments.size(); ++i) {
        const auto& a = assignments[i];
        auto& outcome = result.agents[i];
        outcome.agent_id = a.agent_id;
        std::error_code ec;
        fs::remove(a.shard_path, ec);
        // A re-extraction pass runs on the first agent only.
        bool idle = config.reextraction() ? i != 0 : a.seed_indices.empty();
        if (idle) {
            outcome.ok = true;
            continue;
        }

        int fds[2];
        if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0)
            throw agent_error("SpawnFailure", std::string("socketpair: ") + std::strerror(errno));
        auto& r = running[i];
        r.host_fd = fds[0];

        if (options.mode == AgentMode::Thread) {
            int agent_fd = fds[1];
            const CrawlOptions* base = &options.crawl;
            r.agent_thread = std::thread([agent_fd, base] {
                run_agent(agent_fd, base, false);
                ::close(agent_fd);
            });
        } else {
            posix_spawn_file_actions_t actions;
            posix_spawn_file_actions_init(&actions);
            posix_spawn_file_actions_adddup2(&actions, fds[1], 3);
            std::string binary = options.agent_binary.string();
            std::vector<std::string> args = {binary, "agent", "--control-fd", "3"};
            std::vector<char*> argv;
            for (auto& s : args)
                argv.push_back(s.data());
            argv.push_back(nullptr);
            pid_t pid = -1;
            int rc = posix_spawn(&pid, binary.c_str(), &actions, nullptr, argv.data(), environ);
            posix_spawn_file_actions_destroy(&actions);
            ::close(fds[1]);
            if (rc != 0) {
                ::close(fds[0]);
                r.host_fd = -1;
                outcome.error = std::string("spawn failed: ") + std::strerror(rc);
                continue;
            }
            r.pid = pid;
        }

        try {
            write_message(r.host_fd, start_message(seeds, a, config, endpoint, options));
        } catch (const Error& e) {
            outcome.error = e.what();
        }
        r.reader = std::thread([&r, &outcome] { collect(r.host_fd, outcome); });
    }

    for (std::size_t i = 0; i < running.size(); ++i) {
        auto& r = running[i];
        if (r.reader.joinable())
            r.reader.join();
        if (r.agent_thread.joinable())
            r.agent_thread.join();
        if (r.pid > 0) {
            int status = 0;
            while (::waitpid(r.pid, &status, 0) < 0 && errno == EINTR) {
            }
            bool clean = WIFEXITED(status) && WEXITSTATUS(status) == 0;
            if (!clean && result.agents[i].ok) {
                result.agents[i].ok = false;
                result.agents[i].error = "agent exited abnormally";
            }
        }
        if (r.host_fd >= 0)
            ::close(r.host_fd);
    }

    std::vector<fs::path> shards;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        const auto& a = assignments[i];
        auto& outcome = result.agents[i];
        shards.push_back(a.shard_path);
        if (outcome.ok) {
            result.summary.merge(outcome.summary);
            continue;
        }
        spdlog::error("agent {} failed: {}", a.agent_id, outcome.error);
        std::set<std::size_t> done(outcome.completed.begin(), outcome.completed.end());
        for (auto s : a.seed_indices)
            if (!done.count(s))
                outcome.unprocessed.push_back(s);
        result.unprocessed.insert(result.unprocessed.end(), outcome.unprocessed.begin(), outcome.unprocessed.end());
    }
    std::sort(result.unprocessed.begin(), result.unprocessed.end());
    result.merged_rows = merge_shards(shards, merged_path);
    return result;
}

} // namespace imcrawler
