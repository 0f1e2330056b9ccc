#include "imcrawler/cli.hpp"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <iostream>
#include <memory>
#include <mutex>
#include <tuple>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "imcrawler/crawl.hpp"
#include "imcrawler/fixture/server.hpp"
#include "imcrawler/fixture/truth.hpp"
#include "imcrawler/stages.hpp"
#include "imcrawler/url.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler {

namespace {

void init_logging(const std::string& level)
{
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::stderr_color_mt("imcrawler");
        spdlog::set_default_logger(logger);
        spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");
    });
    spdlog::set_level(spdlog::level::from_str(level));
}

fs::path self_binary()
{
    std::error_code ec;
    auto p = fs::read_symlink("/proc/self/exe", ec);
    return ec ? fs::path{} : p;
}

std::vector<std::size_t> all_indices(std::size_t n)
{
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = i + 1;
    return v;
}

std::vector<std::chrono::milliseconds> parse_backoff(const std::string& text)
{
    std::vector<std::chrono::milliseconds> out;
    for (const auto& part : split(text, ',')) {
        if (trim(part).empty())
            continue;
        auto v = parse_int(trim(part));
        if (!v || *v < 0)
            throw Error(ErrorCategory::Usage, "BadOption", "bad --backoff-ms value '" + part + "'");
        out.emplace_back(*v);
    }
    return out;
}

std::pair<std::string, int> parse_bind(const std::string& text)
{
    std::string s = text;
    if (auto url = parse_url(text))
        return {url->host, url->port ? url->port : 80};
    auto colon = s.rfind(':');
    if (colon == std::string::npos)
        throw Error(ErrorCategory::Usage, "BadOption", "expected host:port, got '" + text + "'");
    auto port = parse_int(s.substr(colon + 1));
    if (!port || *port < 0 || *port > 65535)
        throw Error(ErrorCategory::Usage, "BadOption", "bad port in '" + text + "'");
    return {s.substr(0, colon), static_cast<int>(*port)};
}

struct CoordinateRun {
    CoordinatorResult result;
    std::vector<AgentAssignment> assignments;
};

CoordinateRun stage_coordinate(const fs::path& seeds_path, const std::vector<SeedProfile>& seeds,
                               const CrawlConfig& config, const fs::path& config_path, const std::string& endpoint,
                               std::size_t agents, std::size_t sessions, const fs::path& merged,
                               const CoordinatorOptions& options)
{
    auto started = std::chrono::steady_clock::now();
    CoordinateRun run;
    run.assignments = partition_seeds(seeds.size(), agents, sessions, merged);
    run.result = run_agents(seeds, run.assignments, config, endpoint, merged, options);
    nlohmann::json assignments = nlohmann::json::array();
    for (const auto& a : run.assignments)
        assignments.push_back({{"agent_id", a.agent_id},
                               {"seed_indices", a.seed_indices},
                               {"sessions", a.sessions},
                               {"shard", a.shard_path.string()}});
    int code = run.result.all_ok() ? 0 : 1;
    write_manifest(merged,
                   {{"subcommand", "coordinate"},
                    {"config", {{"crawl", dump_config(config)}, {"agents", agents}, {"sessions", sessions},
                                {"endpoint", endpoint}, {"assignments", assignments}}},
                    {"inputs", {{"seeds", seeds_path.string()}, {"config", config_path.string()}}},
                    {"outputs", {{"merged", merged.string()}}},
                    {"result", run.result.to_json()}},
                   started, code);
    return run;
}

CrawlSummary stage_crawl(const fs::path& seeds_path, const std::vector<SeedProfile>& seeds, const CrawlConfig& config,
                         const fs::path& config_path, const std::string& endpoint, const CrawlOptions& options)
{
    auto started = std::chrono::steady_clock::now();
    auto summary = crawl(seeds, all_indices(seeds.size()), config, endpoint, options);
    nlohmann::json outputs = {{"raw", config.output_path.string()}};
    if (!config.reextraction())
        outputs["friend_links"] = config.friend_links_path.string();
    write_manifest(config.output_path,
                   {{"subcommand", "crawl"},
                    {"config", {{"crawl", dump_config(config)}, {"endpoint", endpoint}}},
                    {"inputs", {{"seeds", seeds_path.string()}, {"config", config_path.string()}}},
                    {"outputs", outputs},
                    {"summary", summary.to_json()}},
                   started, 0);
    return summary;
}

void remove_if_exists(const fs::path& p)
{
    std::error_code ec;
    fs::remove_all(p, ec);
    fs::remove(manifest_path(p), ec);
}

int fail(const Error& e)
{
    std::cerr << "error[" << category_name(e.category()) << "] " << e.code() << ": " << e.what() << "\n";
    return e.category() == ErrorCategory::Usage ? 2 : 1;
}

} // namespace

DemoResult run_demo(const DemoOptions& o)
{
    auto started = std::chrono::steady_clock::now();
    const auto dir = fs::absolute(o.out).lexically_normal();
    fs::create_directories(dir);
    spdlog::info("demo: n={} seed={} into {}", o.n, o.seed, dir.string());

    fixture::GeneratorParams params;
    params.n_profiles = o.n;
    params.mean_degree = o.mean_degree;
    params.disclosure_rate = o.disclosure_rate;
    params.posts_max = o.posts_max;
    params.rng_seed = o.seed;
    auto network = std::make_shared<fixture::FixtureNetwork>(
        stage_generate(params, dir / "network.cbor", dir / "truth"));

    fixture::ServeOptions serve;
    serve.page_size = o.page_size;
    serve.faults = fixture::plan_truncation(*network, o.truncate_rate, o.seed);
    fixture::FixtureServer server(network, serve);
    auto [host, port] = o.endpoint ? parse_bind(*o.endpoint) : std::pair<std::string, int>{"127.0.0.1", 0};
    server.start(host, port);
    auto endpoint = server.endpoint();
    spdlog::info("demo: serving {} profiles at {} ({} truncated About pages)", network->size(), endpoint,
                 serve.faults.truncate_about.size());

    auto seeds = stage_seeds(*network, o.seed_count, o.seed, dir / "seeds.csv");

    write_text_file(dir / "crawl.cfg", fmt::format("friendLinks=friend_links.txt\noutputFile=raw.csv\ntotalPost={}\n"
                                                   "depth={}\nagents={}\nsessionsPerAgent={}\n"
                                                   "minDelayMs=0\nmaxDelayMs=0\n",
                                                   o.total_post, o.depth, o.agents, o.sessions));
    auto config = parse_config(dir / "crawl.cfg");
    remove_if_exists(dir / "raw.csv");

    CoordinatorOptions copts;
    copts.mode = o.mode;
    copts.agent_binary = o.agent_binary.empty() ? self_binary() : o.agent_binary;
    copts.crawl.pacing_seed = o.seed;
    auto coordinated = stage_coordinate(dir / "seeds.csv", seeds, config, dir / "crawl.cfg", endpoint, o.agents,
                                        o.sessions, dir / "raw.csv", copts);
    if (!coordinated.result.all_ok())
        throw Error(ErrorCategory::Agent, "AgentFailure", "an agent failed; see raw.csv.manifest.json");
    spdlog::info("demo: crawled {} profiles, {} posts", coordinated.result.summary.profiles_captured,
                 coordinated.result.summary.posts_captured);

    auto structured = stage_normalize(dir / "raw.csv", dir / "structured");
    pipeline::VerificationPolicy policy;
    policy.total_post = o.total_post;
    auto verified = stage_verify(dir / "structured", dir / "report.csv", dir / "reextract.txt", policy);
    spdlog::info("demo: {} profile captures, {} junk", verified.reports.size(), verified.junk);

    nlohmann::json redo_json = nullptr;
    remove_if_exists(dir / "store.db");
    if (verified.reextract > 0) {
        write_text_file(dir / "reextract.cfg",
                        fmt::format("friendLinks=friend_links.txt\noutputFile=raw-redo.csv\ntotalPost={}\n"
                                    "reextractLinksFile=reextract.txt\nseedProfile=1\nminDelayMs=0\nmaxDelayMs=0\n",
                                    o.total_post));
        auto redo_config = parse_config(dir / "reextract.cfg");
        remove_if_exists(dir / "raw-redo.csv");
        CrawlOptions ropts;
        ropts.pacing_seed = o.seed;
        auto redo = stage_crawl(dir / "seeds.csv", seeds, redo_config, dir / "reextract.cfg", endpoint, ropts);
        stage_normalize(dir / "raw-redo.csv", dir / "structured-redo");
        auto reverified =
            stage_verify(dir / "structured-redo", dir / "report-redo.csv", dir / "reextract-redo.txt", policy);
        spdlog::info("demo: re-extracted {} profiles, {} still junk", redo.profiles_captured, reverified.junk);
        stage_load(dir / "structured", dir / "store.db", dir / "report.csv");
        stage_load(dir / "structured-redo", dir / "store.db", dir / "report-redo.csv");
        redo_json = {{"urls", verified.reextract}, {"captured", redo.profiles_captured}, {"junk_after", reverified.junk}};
    } else {
        stage_load(dir / "structured", dir / "store.db", dir / "report.csv");
    }
    server.stop();

    auto sample = stage_filter(dir / "store.db", o.cities, dir / "sample.csv");
    nlohmann::json stats;
    if (sample.empty()) {
        spdlog::warn("demo: no profiles in {}; stats cover the whole store", join(o.cities, ","));
        stats = stage_stats(dir / "store.db", std::nullopt, dir / "stats.json");
    } else {
        stats = stage_stats(dir / "store.db", dir / "sample.csv", dir / "stats.json");
    }

    std::uint64_t stored = 0;
    {
        pipeline::Store store(dir / "store.db");
        stored = store.profile_count();
    }
    DemoResult result;
    result.stats = stats;
    result.duration_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    result.summary = {{"out", dir.string()},
                      {"profiles", network->size()},
                      {"crawl", coordinated.result.summary.to_json()},
                      {"raw_rows", structured.raw_rows},
                      {"junk", verified.junk},
                      {"reextract", redo_json},
                      {"stored_profiles", stored},
                      {"sample", sample.size()},
                      {"duration_ms", result.duration_ms}};
    write_manifest(dir / "demo",
                   {{"subcommand", "demo"},
                    {"config",
                     {{"seed", o.seed}, {"n", o.n}, {"mean_degree", o.mean_degree},
                      {"disclosure_rate", o.disclosure_rate}, {"seed_count", o.seed_count},
                      {"depth", o.depth}, {"agents", o.agents}, {"sessions", o.sessions},
                      {"total_post", o.total_post}, {"truncate_rate", o.truncate_rate},
                      {"page_size", o.page_size}, {"cities", o.cities}}},
                    {"inputs", nlohmann::json::object()},
                    {"outputs", {{"dir", dir.string()}, {"stats", (dir / "stats.json").string()}}},
                    {"summary", result.summary}},
                   started, 0);
    return result;
}

int run_cli(const std::vector<std::string>& args)
{
    CLI::App app{"imcrawler: crawl a synthetic social network and analyse the captured profiles", "imcrawler"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

    // generate
    auto* generate = app.add_subcommand("generate", "Generate a fixture network and its ground truth");
    fixture::GeneratorParams gen;
    fs::path gen_out = "network.cbor";
    std::string gen_truth;
    generate->add_option("--n", gen.n_profiles, "Number of profiles")->capture_default_str();
    generate->add_option("--mean-degree", gen.mean_degree, "Mean friend count")->capture_default_str();
    generate->add_option("--disclosure-rate", gen.disclosure_rate, "Per-attribute disclosure probability")
        ->capture_default_str();
    generate->add_option("--posts-min", gen.posts_min)->capture_default_str();
    generate->add_option("--posts-max", gen.posts_max)->capture_default_str();
    generate->add_option("--seed", gen.rng_seed, "Generator seed")->capture_default_str();
    generate->add_option("--out", gen_out, "Network file")->capture_default_str();
    generate->add_option("--truth", gen_truth, "Also write ground-truth tables to this directory");

    // serve
    auto* serve = app.add_subcommand("serve", "Serve a fixture network over HTTP until interrupted");
    fs::path serve_network = "network.cbor";
    std::string serve_host = "127.0.0.1";
    int serve_port = 8480;
    fixture::ServeOptions serve_opts;
    double serve_truncate = 0;
    std::uint64_t serve_fault_seed = 1;
    bool serve_no_truth = false;
    serve->add_option("--network", serve_network)->capture_default_str();
    serve->add_option("--host", serve_host)->capture_default_str();
    serve->add_option("--port", serve_port, "0 picks a free port")->capture_default_str();
    std::string serve_bind;
    serve->add_option("--bind", serve_bind, "host:port; overrides --host and --port");
    serve->add_option("--page-size", serve_opts.page_size)->capture_default_str();
    serve->add_option("--truncate-rate", serve_truncate, "Fraction of About pages served truncated once")
        ->capture_default_str();
    serve->add_option("--fault-seed", serve_fault_seed)->capture_default_str();
    serve->add_flag("--no-truth", serve_no_truth, "Disable the /truth endpoint");

    // seeds
    auto* seeds_cmd = app.add_subcommand("seeds", "Pick seed accounts from a fixture network");
    fs::path seeds_network = "network.cbor";
    std::size_t seeds_count = 2;
    std::uint64_t seeds_seed = 1;
    fs::path seeds_out = "seeds.csv";
    seeds_cmd->add_option("--network", seeds_network)->capture_default_str();
    seeds_cmd->add_option("--count", seeds_count)->capture_default_str();
    seeds_cmd->add_option("--seed", seeds_seed)->capture_default_str();
    seeds_cmd->add_option("--out", seeds_out)->capture_default_str();

    // truth
    auto* truth = app.add_subcommand("truth", "Export ground-truth tables of a fixture network");
    fs::path truth_network = "network.cbor";
    fs::path truth_out = "truth";
    truth->add_option("--network", truth_network)->capture_default_str();
    truth->add_option("--out", truth_out)->capture_default_str();

    // crawl and coordinate share these
    std::string seeds_path;
    std::string config_path;
    std::string endpoint = "http://127.0.0.1:8480";
    std::string backoff = "1000,4000";
    std::size_t max_attempts = 3;
    std::uint64_t pacing_seed = 0;

    auto* crawl_cmd = app.add_subcommand("crawl", "Crawl from every seed in one process");
    crawl_cmd->add_option("--seeds", seeds_path, "Seed file");
    crawl_cmd->add_option("--config", config_path, "Crawl configuration")->required();
    crawl_cmd->add_option("--endpoint", endpoint)->capture_default_str();
    crawl_cmd->add_option("--backoff-ms", backoff, "Retry delays")->capture_default_str();
    crawl_cmd->add_option("--max-attempts", max_attempts)->capture_default_str();
    crawl_cmd->add_option("--pacing-seed", pacing_seed)->capture_default_str();

    auto* coordinate = app.add_subcommand("coordinate", "Split seeds across agents and merge their output");
    std::size_t agents = 0;
    std::size_t sessions = 0;
    std::string merged;
    std::string mode = "process";
    std::string agent_binary;
    coordinate->add_option("--seeds", seeds_path, "Seed file");
    coordinate->add_option("--config", config_path, "Crawl configuration")->required();
    coordinate->add_option("--endpoint", endpoint)->capture_default_str();
    coordinate->add_option("--agents", agents, "Agents (default: config agents)");
    coordinate->add_option("--sessions", sessions, "Sessions per agent (default: config sessionsPerAgent)");
    coordinate->add_option("--merged", merged, "Merged raw output (default: config outputFile)");
    coordinate->add_option("--mode", mode, "process or thread")->check(CLI::IsMember({"process", "thread"}))
        ->capture_default_str();
    coordinate->add_option("--agent-binary", agent_binary, "Agent executable (default: this binary)");
    coordinate->add_option("--backoff-ms", backoff, "Retry delays")->capture_default_str();
    coordinate->add_option("--max-attempts", max_attempts)->capture_default_str();
    coordinate->add_option("--pacing-seed", pacing_seed)->capture_default_str();

    auto* agent = app.add_subcommand("agent", "");  // internal; empty description hides it
    int control_fd = -1;
    agent->add_option("--control-fd", control_fd)->required();

    // normalize
    auto* normalize = app.add_subcommand("normalize", "Convert raw captures into structured records");
    fs::path raw_path;
    fs::path structured_out;
    normalize->add_option("--raw", raw_path)->required();
    normalize->add_option("--out", structured_out)->required();

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Check structured records and list junk profiles");
    fs::path verify_in;
    fs::path report_path;
    fs::path reextract_out;
    std::int64_t total_post = 0;
    std::string required_checks;
    verify_cmd->add_option("--in", verify_in)->required();
    verify_cmd->add_option("--report", report_path)->required();
    verify_cmd->add_option("--reextract-out", reextract_out)->required();
    verify_cmd->add_option("--total-post", total_post, "Post limit (default: from --config, else unchecked)");
    verify_cmd->add_option("--config", config_path, "Crawl configuration supplying totalPost");
    verify_cmd->add_option("--required", required_checks, "Comma-separated required checks");

    // load
    auto* load_cmd = app.add_subcommand("load", "Insert structured records into the store");
    fs::path load_in;
    fs::path db_path;
    std::string load_report;
    load_cmd->add_option("--in", load_in)->required();
    load_cmd->add_option("--db", db_path)->required();
    load_cmd->add_option("--report", load_report, "Skip captures this report marks as junk");

    // filter
    auto* filter = app.add_subcommand("filter", "Select stored profiles by current city");
    std::string cities = "Bangalore,Delhi,Mumbai,Pune";
    fs::path filter_out;
    filter->add_option("--db", db_path)->required();
    filter->add_option("--cities", cities)->capture_default_str();
    filter->add_option("--out", filter_out)->required();

    // stats
    auto* stats = app.add_subcommand("stats", "Disclosure and post statistics");
    std::string population;
    fs::path stats_out;
    stats->add_option("--db", db_path)->required();
    stats->add_option("--population", population, "Profiles CSV (e.g. from filter); default: whole store");
    stats->add_option("--out", stats_out)->required();

    // demo
    auto* demo = app.add_subcommand("demo", "Run the whole workflow on a generated network");
    DemoOptions d;
    std::string demo_endpoint;
    std::string demo_mode = "thread";
    std::string demo_cities = join(d.cities, ",");
    demo->add_option("--seed", d.seed)->capture_default_str();
    demo->add_option("--n", d.n)->capture_default_str();
    demo->add_option("--out", d.out)->capture_default_str();
    demo->add_option("--endpoint", demo_endpoint, "host:port to serve on (default: a free local port)");
    demo->add_option("--mean-degree", d.mean_degree)->capture_default_str();
    demo->add_option("--disclosure-rate", d.disclosure_rate)->capture_default_str();
    demo->add_option("--seeds", d.seed_count)->capture_default_str();
    demo->add_option("--depth", d.depth)->capture_default_str();
    demo->add_option("--agents", d.agents)->capture_default_str();
    demo->add_option("--sessions", d.sessions)->capture_default_str();
    demo->add_option("--total-post", d.total_post)->capture_default_str();
    demo->add_option("--posts-max", d.posts_max)->capture_default_str();
    demo->add_option("--truncate-rate", d.truncate_rate)->capture_default_str();
    demo->add_option("--page-size", d.page_size)->capture_default_str();
    demo->add_option("--cities", demo_cities)->capture_default_str();
    demo->add_option("--mode", demo_mode, "Agent mode: thread or process")
        ->check(CLI::IsMember({"process", "thread"}))
        ->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        init_logging(log_level);
    } catch (const std::exception&) {
        std::cerr << "error[USAGE] BadOption: unknown log level '" << log_level << "'\n";
        return 2;
    }

    try {
        if (*generate) {
            std::optional<fs::path> truth_dir;
            if (!gen_truth.empty())
                truth_dir = gen_truth;
            auto net = stage_generate(gen, gen_out, truth_dir);
            std::cout << nlohmann::json{{"network", gen_out.string()}, {"profiles", net.size()},
                                        {"edges", net.edge_count()}}.dump()
                      << std::endl;
            return 0;
        }
        if (*serve) {
            auto started = std::chrono::steady_clock::now();
            auto net = std::make_shared<fixture::FixtureNetwork>(fixture::load_network(serve_network));
            serve_opts.truth_enabled = !serve_no_truth;
            if (serve_truncate > 0)
                serve_opts.faults = fixture::plan_truncation(*net, serve_truncate, serve_fault_seed);
            // Block the stop signals before the server spawns its threads so
            // only sigwait below receives them.
            sigset_t set;
            sigemptyset(&set);
            sigaddset(&set, SIGINT);
            sigaddset(&set, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &set, nullptr);
            if (!serve_bind.empty())
                std::tie(serve_host, serve_port) = parse_bind(serve_bind);
            fixture::FixtureServer server(net, serve_opts);
            server.start(serve_host, serve_port);
            nlohmann::json manifest = {
                {"subcommand", "serve"},
                {"config",
                 {{"host", serve_host}, {"port", server.port()}, {"page_size", serve_opts.page_size},
                  {"truncate_rate", serve_truncate}, {"fault_seed", serve_fault_seed},
                  {"truth", serve_opts.truth_enabled}}},
                {"inputs", {{"network", serve_network.string()}}},
                {"outputs", {{"endpoint", server.endpoint()}}}};
            auto primary = fs::path(serve_network.string() + ".serve");
            write_manifest(primary, manifest, started, 0);
            std::cout << server.endpoint() << std::endl;
            int sig = 0;
            sigwait(&set, &sig);
            auto counters = server.counters();
            server.stop();
            manifest["counters"] = {{"about", counters.about},     {"friends", counters.friends},
                                    {"timeline", counters.timeline}, {"logins", counters.logins},
                                    {"logouts", counters.logouts}, {"unauthorized", counters.unauthorized},
                                    {"truncated", counters.truncated}};
            write_manifest(primary, manifest, started, 0);
            return 0;
        }
        if (*seeds_cmd) {
            auto net = fixture::load_network(seeds_network);
            auto seeds = stage_seeds(net, seeds_count, seeds_seed, seeds_out);
            std::cout << nlohmann::json{{"seeds", seeds_out.string()}, {"count", seeds.size()}}.dump() << std::endl;
            return 0;
        }
        if (*truth) {
            stage_truth(fixture::load_network(truth_network), truth_out);
            std::cout << nlohmann::json{{"truth", truth_out.string()}}.dump() << std::endl;
            return 0;
        }
        if (*crawl_cmd || *coordinate) {
            // Configuration first, so a bad config is reported before anything else.
            auto config = parse_config(config_path);
            if (seeds_path.empty())
                throw Error(ErrorCategory::Usage, "MissingOption", "--seeds is required");
            auto seeds = parse_seed_file(seeds_path);
            validate_against_seeds(config, seeds);
            CrawlOptions copts;
            copts.backoff = parse_backoff(backoff);
            copts.max_attempts = std::max<std::size_t>(1, max_attempts);
            copts.pacing_seed = pacing_seed;
            if (*crawl_cmd) {
                auto summary = stage_crawl(seeds_path, seeds, config, config_path, endpoint, copts);
                std::cout << summary.to_json().dump() << std::endl;
                return 0;
            }
            CoordinatorOptions options;
            options.mode = mode == "thread" ? AgentMode::Thread : AgentMode::Process;
            options.agent_binary = agent_binary.empty() ? self_binary() : fs::path(agent_binary);
            options.crawl = copts;
            auto n_agents = agents ? agents : static_cast<std::size_t>(std::max<std::int64_t>(1, config.agents));
            auto n_sessions =
                sessions ? sessions : static_cast<std::size_t>(std::max<std::int64_t>(1, config.sessions_per_agent));
            fs::path merged_path = merged.empty() ? config.output_path : fs::path(merged);
            auto run = stage_coordinate(seeds_path, seeds, config, config_path, endpoint, n_agents, n_sessions,
                                        merged_path, options);
            std::cout << run.result.to_json().dump() << std::endl;
            if (!run.result.all_ok()) {
                std::cerr << "error[AGENT] AgentFailure: unprocessed seeds "
                          << nlohmann::json(run.result.unprocessed).dump() << "\n";
                return 1;
            }
            return 0;
        }
        if (*agent)
            return agent_main(control_fd);
        if (*normalize) {
            auto data = stage_normalize(raw_path, structured_out);
            std::cout << nlohmann::json{{"profiles", data.profiles.size()},
                                        {"posts", data.posts.size()},
                                        {"raw_rows", data.raw_rows},
                                        {"skipped", data.skipped.size()}}.dump()
                      << std::endl;
            return 0;
        }
        if (*verify_cmd) {
            pipeline::VerificationPolicy policy;
            if (!config_path.empty())
                policy.total_post = parse_config(config_path).total_post;
            if (total_post > 0)
                policy.total_post = total_post;
            if (!required_checks.empty()) {
                policy.required.clear();
                const auto& names = pipeline::check_names();
                for (const auto& c : split(required_checks, ',')) {
                    auto name = std::string(trim(c));
                    if (std::find(names.begin(), names.end(), name) == names.end())
                        throw Error(ErrorCategory::Usage, "UnknownCheck", "unknown check '" + name + "'");
                    policy.required.insert(name);
                }
            }
            auto out = stage_verify(verify_in, report_path, reextract_out, policy);
            std::cout << nlohmann::json{{"profiles", out.reports.size()}, {"junk", out.junk},
                                        {"reextract", out.reextract}}.dump()
                      << std::endl;
            return 0;
        }
        if (*load_cmd) {
            std::optional<fs::path> report;
            if (!load_report.empty())
                report = load_report;
            auto rep = stage_load(load_in, db_path, report);
            std::cout << rep.to_json().dump() << std::endl;
            return 0;
        }
        if (*filter) {
            auto list = split(cities, ',');
            std::vector<std::string> names;
            for (const auto& c : list)
                if (!trim(c).empty())
                    names.emplace_back(trim(c));
            auto records = stage_filter(db_path, names, filter_out);
            std::cout << nlohmann::json{{"matched", records.size()}, {"out", filter_out.string()}}.dump()
                      << std::endl;
            return 0;
        }
        if (*stats) {
            std::optional<fs::path> pop;
            if (!population.empty())
                pop = population;
            auto j = stage_stats(db_path, pop, stats_out);
            std::cout << j.dump() << std::endl;
            return 0;
        }
        if (*demo) {
            if (!demo_endpoint.empty())
                d.endpoint = demo_endpoint;
            d.mode = demo_mode == "process" ? AgentMode::Process : AgentMode::Thread;
            d.cities.clear();
            for (const auto& c : split(demo_cities, ','))
                if (!trim(c).empty())
                    d.cities.emplace_back(trim(c));
            auto result = run_demo(d);
            std::cout << result.summary.dump(2) << std::endl;
            return 0;
        }
    } catch (const Error& e) {
        return fail(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error[IO] FilesystemError: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[INTERNAL] Unexpected: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace imcrawler
