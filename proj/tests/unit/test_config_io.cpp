#include <doctest.h>

#include <algorithm>

#include "imcrawler/config_io.hpp"
#include "imcrawler/rng.hpp"
#include "support/support.hpp"

using namespace imcrawler;
using testing::TempDir;

namespace {

ConfigError::Kind config_error_kind(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.kind();
    }
    FAIL("expected ConfigError");
    return ConfigError::Kind::MissingFile;
}

} // namespace

TEST_CASE("seed file: single row")
{
    TempDir dir;
    write_text_file(dir / "seeds.csv", "u100,alice,pw1\n");
    auto seeds = parse_seed_file(dir / "seeds.csv");
    REQUIRE(seeds.size() == 1);
    CHECK(seeds[0].profile_id == "u100");
    CHECK(seeds[0].login_name == "alice");
    CHECK(seeds[0].secret == "pw1");
    CHECK_FALSE(seeds[0].friend_links_path);
}

TEST_CASE("seed file: empty, comments and blanks")
{
    TempDir dir;
    write_text_file(dir / "empty.csv", "");
    CHECK(parse_seed_file(dir / "empty.csv").empty());
    write_text_file(dir / "c.csv", "# profile_id,login,secret\n\nu1,a,b\r\n  \nu2,c,d\n");
    auto seeds = parse_seed_file(dir / "c.csv");
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[1].profile_id == "u2");
}

TEST_CASE("seed file: errors")
{
    TempDir dir;
    write_text_file(dir / "dup.csv", "u100,a,b\nu100,c,d\n");
    try {
        parse_seed_file(dir / "dup.csv");
        FAIL("expected DuplicateSeed");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ConfigError::Kind::DuplicateSeed);
        CHECK(e.detail() == "u100");
    }
    write_text_file(dir / "short.csv", "u1,a,b\nu2,c\n");
    try {
        parse_seed_file(dir / "short.csv");
        FAIL("expected MalformedLine");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ConfigError::Kind::MalformedLine);
        CHECK(e.line_no() == 2);
    }
    CHECK(config_error_kind([&] { parse_seed_file(dir / "nope.csv"); }) == ConfigError::Kind::MissingFile);
}

TEST_CASE("seed file round trip")
{
    TempDir dir;
    std::vector<SeedProfile> seeds = {{"u1", "a@x", "s,1", {}}, {"u2", "b@x", "s\"2", {}}};
    write_seed_file(dir / "s.csv", seeds);
    CHECK(parse_seed_file(dir / "s.csv") == seeds);
}

TEST_CASE("config: documented keys and defaults")
{
    TempDir dir;
    write_text_file(dir / "c.cfg", "friendLinks=links.txt\noutputFile=out.csv\ntotalPost=25\n");
    auto c = parse_config(dir / "c.cfg");
    CHECK(c.total_post == 25);
    CHECK(c.depth == 1);
    CHECK(c.agents == 1);
    CHECK(c.sessions_per_agent == 1);
    CHECK(c.min_delay_ms == 200);
    CHECK(c.max_delay_ms == 800);
    CHECK(c.friend_links_path == fs::absolute(dir / "links.txt").lexically_normal());
    CHECK(c.output_path == fs::absolute(dir / "out.csv").lexically_normal());
    CHECK_FALSE(c.reextraction());
}

TEST_CASE("config: friendLinksFile alias")
{
    auto a = parse_config_text("friendLinksFile=l.txt\noutputFile=o.csv\ntotalPost=3\n", "/tmp");
    auto b = parse_config_text("friendLinks=l.txt\noutputFile=o.csv\ntotalPost=3\n", "/tmp");
    CHECK(a == b);
}

TEST_CASE("config: errors")
{
    const std::string base = "friendLinks=l.txt\noutputFile=o.csv\n";
    CHECK(config_error_kind([&] { parse_config_text(base + "totalPost=0\n", "/tmp"); }) ==
          ConfigError::Kind::BadValue);
    CHECK(config_error_kind([&] { parse_config_text(base + "totalPost=many\n", "/tmp"); }) ==
          ConfigError::Kind::BadValue);
    CHECK(config_error_kind([&] { parse_config_text(base + "totalPost=5\nseedProfile=2\n", "/tmp"); }) ==
          ConfigError::Kind::InconsistentPair);
    CHECK(config_error_kind([&] { parse_config_text(base + "totalPost=5\nreextractLinksFile=r.txt\n", "/tmp"); }) ==
          ConfigError::Kind::InconsistentPair);
    CHECK(config_error_kind([&] { parse_config_text(base + "totalPost=5\nspeed=3\n", "/tmp"); }) ==
          ConfigError::Kind::UnknownKey);
    CHECK(config_error_kind([&] { parse_config_text(base + "totalPost=5\nminDelayMs=9\nmaxDelayMs=3\n", "/tmp"); }) ==
          ConfigError::Kind::BadValue);
    CHECK(config_error_kind([&] { parse_config("/nonexistent/c.cfg"); }) == ConfigError::Kind::MissingFile);
}

TEST_CASE("config: seed index must exist")
{
    auto c = parse_config_text("friendLinks=l\noutputFile=o\ntotalPost=5\nseedProfile=3\nreextractLinksFile=r\n",
                               "/tmp");
    std::vector<SeedProfile> two = {{"u1", "a", "b", {}}, {"u2", "c", "d", {}}};
    CHECK(config_error_kind([&] { validate_against_seeds(c, two); }) == ConfigError::Kind::BadValue);
    two.push_back({"u3", "e", "f", {}});
    CHECK_NOTHROW(validate_against_seeds(c, two));
}

TEST_CASE("config: line order does not matter")
{
    std::vector<std::string> lines = {"friendLinks=links.txt", "outputFile=out/raw.csv", "totalPost=7",
                                      "reextractLinksFile=redo.txt", "seedProfile=2", "depth=3",
                                      "agents=4", "sessionsPerAgent=2", "minDelayMs=10", "maxDelayMs=20",
                                      "# comment", ""};
    auto text_of = [](const std::vector<std::string>& v) { return join(v, "\n") + "\n"; };
    const auto expected = parse_config_text(text_of(lines), "/work");
    Rng rng(11);
    for (int round = 0; round < 200; ++round) {
        for (std::size_t i = lines.size(); i > 1; --i)
            std::swap(lines[i - 1], lines[rng.below(i)]);
        CHECK(parse_config_text(text_of(lines), "/work") == expected);
    }
}

TEST_CASE("config: explicit dump reparses to the same value")
{
    TempDir dir;
    const std::vector<std::string> texts = {
        "friendLinks=l.txt\noutputFile=o.csv\ntotalPost=1\n",
        "friendLinks=a/l.txt\noutputFile=/abs/o.csv\ntotalPost=40\ndepth=2\nagents=3\nminDelayMs=0\nmaxDelayMs=0\n",
        "friendLinks=l\noutputFile=o\ntotalPost=9\nseedProfile=1\nreextractLinksFile=r\nsessionsPerAgent=5\n"};
    for (const auto& t : texts) {
        auto c = parse_config_text(t, dir.path());
        write_text_file(dir / "dump.cfg", dump_config(c));
        CHECK(parse_config(dir / "dump.cfg") == c);
        CHECK(dump_config(parse_config(dir / "dump.cfg")) == dump_config(c));
    }
}

TEST_CASE("links file")
{
    TempDir dir;
    write_text_file(dir / "three.txt", "http://h/profile/a\nhttp://h/profile/b\nhttp://h/profile/c\n");
    auto three = read_links_file(dir / "three.txt");
    CHECK(three.urls == std::vector<std::string>{"http://h/profile/a", "http://h/profile/b", "http://h/profile/c"});

    write_text_file(dir / "dup.txt",
                    "http://h/profile/a\nhttp://h/profile/b\nhttp://h/profile/c\nhttp://h/profile/d\nhttp://h/profile/a\n");
    auto dup = read_links_file(dir / "dup.txt");
    CHECK(dup.size() == 4);
    CHECK(dup.urls.front() == "http://h/profile/a");

    write_text_file(dir / "bad.txt", "http://h/profile/a\nnot a url\n");
    try {
        read_links_file(dir / "bad.txt");
        FAIL("expected BadUrl");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ConfigError::Kind::BadUrl);
        CHECK(e.line_no() == 2);
    }
    CHECK(config_error_kind([&] { read_links_file(dir / "missing.txt"); }) == ConfigError::Kind::MissingFile);
}

TEST_CASE("links file round trip")
{
    TempDir dir;
    Rng rng(5);
    for (int round = 0; round < 50; ++round) {
        LinkList list;
        auto n = rng.below(30);
        for (std::uint64_t i = 0; i < n; ++i)
            append_unique(list, "http://127.0.0.1:9/profile/u" + std::to_string(rng.below(40)));
        write_links_file(dir / "l.txt", list);
        CHECK(read_links_file(dir / "l.txt") == list);
    }
}
