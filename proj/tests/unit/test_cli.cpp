#include <doctest.h>

#include <iostream>
#include <sstream>

#include "imcrawler/cli.hpp"
#include "imcrawler/stages.hpp"
#include "support/support.hpp"

using namespace imcrawler;
using testing::TempDir;

namespace {

struct Captured {
    int code = 0;
    std::string out;
    std::string err;
};

Captured run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    Captured c;
    try {
        c.code = run_cli(args);
    } catch (...) {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
        throw;
    }
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    c.out = out.str();
    c.err = err.str();
    return c;
}

// Every regular file under `dir` except manifests, relative path -> bytes.
std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file())
            continue;
        auto rel = fs::relative(e.path(), dir).string();
        if (rel.ends_with(".manifest.json"))
            continue;
        out[rel] = read_text_file(e.path());
    }
    return out;
}

} // namespace

TEST_CASE("usage errors")
{
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"crawl", "--no-such-flag"}).code == 2);
    auto help = run({"--help"});
    CHECK(help.code == 0);
    for (const char* sub : {"generate", "serve", "crawl", "coordinate", "normalize", "verify", "load", "filter",
                            "stats", "demo"})
        CHECK_MESSAGE(help.out.find(sub) != std::string::npos, sub);
}

TEST_CASE("missing config is a CONFIG error")
{
    TempDir dir;
    auto r = run({"crawl", "--config", (dir / "missing.cfg").string(), "--seeds", (dir / "seeds.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("error[CONFIG]") != std::string::npos);
}

TEST_CASE("missing inputs are IO errors")
{
    TempDir dir;
    auto r = run({"normalize", "--raw", (dir / "raw.csv").string(), "--out", (dir / "s").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("error[IO]") != std::string::npos);
    auto s = run({"stats", "--db", (dir / "none.db").string(), "--out", (dir / "stats.json").string()});
    CHECK(s.code == 1);
}

TEST_CASE("bad parameters")
{
    TempDir dir;
    auto r = run({"generate", "--n", "0", "--out", (dir / "n.cbor").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("error[PARAM]") != std::string::npos);
}

TEST_CASE("demo is deterministic and stages rerun byte-identically")
{
    TempDir a, b;
    REQUIRE(run({"demo", "--seed", "42", "--n", "300", "--out", a.path().string()}).code == 0);
    REQUIRE(run({"demo", "--seed", "42", "--n", "300", "--out", b.path().string()}).code == 0);
    CHECK(read_text_file(a / "stats.json") == read_text_file(b / "stats.json"));
    CHECK(fs::exists(a / "demo.manifest.json"));
    for (const char* primary : {"network.cbor", "raw.csv", "report.csv", "store.db", "sample.csv", "stats.json"})
        CHECK_MESSAGE(fs::exists(manifest_path(a / primary)), primary);

    // Downstream stages over the same inputs give the same bytes.
    const auto dir = a.path();
    auto before = snapshot(dir);
    const auto s = dir.string();
    REQUIRE(run({"normalize", "--raw", s + "/raw.csv", "--out", s + "/structured"}).code == 0);
    REQUIRE(run({"verify", "--in", s + "/structured", "--report", s + "/report.csv", "--reextract-out",
                 s + "/reextract.txt", "--config", s + "/crawl.cfg"})
                .code == 0);
    REQUIRE(run({"load", "--in", s + "/structured", "--db", s + "/store.db", "--report", s + "/report.csv"}).code ==
            0);
    REQUIRE(run({"filter", "--db", s + "/store.db", "--out", s + "/sample.csv"}).code == 0);
    REQUIRE(run({"stats", "--db", s + "/store.db", "--population", s + "/sample.csv", "--out", s + "/stats.json"})
                .code == 0);
    auto after = snapshot(dir);
    CHECK(before.size() == after.size());
    for (const auto& [name, bytes] : before)
        CHECK_MESSAGE(after[name] == bytes, name);
}
