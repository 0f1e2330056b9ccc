#include <doctest.h>

#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include "imcrawler/coordinator.hpp"
#include "imcrawler/rng.hpp"
#include "support/support.hpp"

using namespace imcrawler;
using testing::Served;
using testing::TempDir;

namespace {

std::uint64_t data_rows(const fs::path& p)
{
    if (!fs::exists(p))
        return 0;
    auto rows = csv::read_file(p);
    return rows.empty() ? 0 : rows.size() - 1;
}

std::vector<SeedProfile> pick_seeds(const fixture::FixtureNetwork& net, std::size_t n)
{
    std::vector<SeedProfile> seeds;
    for (std::size_t i = 0; i < n; ++i)
        seeds.push_back(testing::seed_for(net, net.profile(i * 7 % net.size()).profile_id));
    return seeds;
}

CrawlConfig config_in(const TempDir& dir, const std::string& extra = "")
{
    return parse_config_text(
        "friendLinks=links.txt\noutputFile=raw.csv\ntotalPost=3\nminDelayMs=0\nmaxDelayMs=0\n" + extra, dir.path());
}

} // namespace

TEST_CASE("partition: balanced round robin")
{
    auto five = partition_seeds(5, 2, 1, "/o/raw.csv");
    REQUIRE(five.size() == 2);
    CHECK(five[0].seed_indices == std::vector<std::size_t>{1, 3, 5});
    CHECK(five[1].seed_indices == std::vector<std::size_t>{2, 4});
    CHECK(five[1].shard_path == fs::path("/o/raw.csv.shard-1.csv"));

    auto three = partition_seeds(3, 5, 2, "/o/raw.csv");
    REQUIRE(three.size() == 5);
    std::vector<std::size_t> sizes;
    for (const auto& a : three)
        sizes.push_back(a.seed_indices.size());
    CHECK(sizes == std::vector<std::size_t>{1, 1, 1, 0, 0});
    CHECK(three[0].sessions == 2);
}

TEST_CASE("partition: always a balanced permutation")
{
    Rng rng(3);
    for (int round = 0; round < 300; ++round) {
        auto n = rng.below(40);
        auto agents = 1 + rng.below(9);
        auto parts = partition_seeds(n, agents, 1, "m.csv");
        REQUIRE(parts.size() == agents);
        std::vector<std::size_t> all;
        std::size_t lo = SIZE_MAX, hi = 0;
        for (std::size_t a = 0; a < parts.size(); ++a) {
            CHECK(parts[a].agent_id == a);
            all.insert(all.end(), parts[a].seed_indices.begin(), parts[a].seed_indices.end());
            lo = std::min(lo, parts[a].seed_indices.size());
            hi = std::max(hi, parts[a].seed_indices.size());
        }
        CHECK(hi - lo <= 1);
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> want(n);
        for (std::size_t i = 0; i < n; ++i)
            want[i] = i + 1;
        CHECK(all == want);
        CHECK(partition_seeds(n, agents, 1, "m.csv") == parts);
    }
}

TEST_CASE("control messages survive framing")
{
    int fds[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
    std::vector<nlohmann::json> sent = {{{"cmd", "start"}, {"seed_indices", {1, 2}}},
                                        {{"status", "progress"}, {"blob", std::string(200000, 'x')}},
                                        nlohmann::json::object()};
    std::thread writer([&] {
        for (const auto& m : sent)
            write_message(fds[0], m);
        ::close(fds[0]);
    });
    for (const auto& m : sent) {
        auto got = read_message(fds[1]);
        REQUIRE(got);
        CHECK(*got == m);
    }
    CHECK_FALSE(read_message(fds[1]));
    writer.join();
    ::close(fds[1]);
}

TEST_CASE("merge: lossless and in agent order")
{
    TempDir dir;
    const std::string header = std::string(kRawHeader) + "\n";
    write_text_file(dir / "a.csv", header + "profile,u,1,f,\"x,y\",t\nprofile,u,1,g,v,t\n");
    write_text_file(dir / "b.csv", header + "post,w,2,1.title,\"multi\nline\",t\n");
    auto n = merge_shards({dir / "a.csv", dir / "missing.csv", dir / "b.csv"}, dir / "m.csv");
    CHECK(n == 3);
    CHECK(read_text_file(dir / "m.csv") ==
          header + "profile,u,1,f,\"x,y\",t\nprofile,u,1,g,v,t\npost,w,2,1.title,\"multi\nline\",t\n");
}

TEST_CASE("thread agents: merged rows equal the shard rows")
{
    Served served(testing::make_network(80, 4.0, 12));
    TempDir dir;
    auto seeds = pick_seeds(*served.network, 4);
    auto config = config_in(dir);
    auto parts = partition_seeds(seeds.size(), 2, 1, dir / "raw.csv");
    CoordinatorOptions o;
    o.mode = AgentMode::Thread;
    auto result = run_agents(seeds, parts, config, served.endpoint(), dir / "raw.csv", o);
    CHECK(result.all_ok());
    CHECK(result.unprocessed.empty());
    CHECK(result.merged_rows == data_rows(parts[0].shard_path) + data_rows(parts[1].shard_path));
    CHECK(result.merged_rows == data_rows(dir / "raw.csv"));
    CHECK(result.summary.per_seed.size() == 4);
    std::uint64_t captured = 0;
    for (const auto& a : result.agents)
        captured += a.summary.profiles_captured;
    CHECK(result.summary.profiles_captured == captured);
}

TEST_CASE("thread agents: a dead agent leaves its seeds unprocessed")
{
    Served served(testing::make_network(60, 4.0, 14));
    TempDir dir;
    auto seeds = pick_seeds(*served.network, 6);
    auto parts = partition_seeds(seeds.size(), 2, 1, dir / "raw.csv");
    CoordinatorOptions o;
    o.mode = AgentMode::Thread;
    o.abort_after_seeds[1] = 1;
    auto result = run_agents(seeds, parts, config_in(dir), served.endpoint(), dir / "raw.csv", o);
    CHECK_FALSE(result.all_ok());
    REQUIRE(result.agents.size() == 2);
    CHECK(result.agents[0].ok);
    CHECK_FALSE(result.agents[1].ok);
    CHECK(result.agents[1].completed == std::vector<std::size_t>{2});
    CHECK(result.unprocessed == std::vector<std::size_t>{4, 6});
    CHECK(result.merged_rows == data_rows(dir / "raw.csv"));
    CHECK(result.merged_rows > 0);
}

TEST_CASE("process agents: same output as thread agents")
{
    Served served(testing::make_network(60, 4.0, 15));
    auto seeds = pick_seeds(*served.network, 3);
    auto run = [&](AgentMode mode, const TempDir& dir) {
        CoordinatorOptions o;
        o.mode = mode;
        o.agent_binary = IMCRAWLER_BIN;
        auto parts = partition_seeds(seeds.size(), 3, 2, dir / "raw.csv");
        auto result = run_agents(seeds, parts, config_in(dir), served.endpoint(), dir / "raw.csv", o);
        CHECK(result.all_ok());
        return result;
    };
    TempDir a, b;
    auto in_threads = run(AgentMode::Thread, a);
    auto in_processes = run(AgentMode::Process, b);
    CHECK(in_threads.merged_rows == in_processes.merged_rows);
    CHECK(in_threads.summary.profiles_captured == in_processes.summary.profiles_captured);
    CHECK(in_threads.summary.posts_captured == in_processes.summary.posts_captured);
}

TEST_CASE("process agents: a killed agent is reported")
{
    Served served(testing::make_network(60, 4.0, 16));
    TempDir dir;
    auto seeds = pick_seeds(*served.network, 4);
    CoordinatorOptions o;
    o.mode = AgentMode::Process;
    o.agent_binary = IMCRAWLER_BIN;
    o.abort_after_seeds[0] = 1;
    auto parts = partition_seeds(seeds.size(), 2, 1, dir / "raw.csv");
    auto result = run_agents(seeds, parts, config_in(dir), served.endpoint(), dir / "raw.csv", o);
    CHECK_FALSE(result.agents[0].ok);
    CHECK(result.agents[1].ok);
    CHECK(result.unprocessed == std::vector<std::size_t>{3});
    CHECK(result.merged_rows == data_rows(dir / "raw.csv"));
}
