#include <doctest.h>

#include <sstream>
#include <thread>

#include "imcrawler/crawl.hpp"
#include "imcrawler/pipeline/normalize.hpp"
#include "imcrawler/pipeline/store.hpp"
#include "imcrawler/pipeline/verify.hpp"
#include "imcrawler/rng.hpp"
#include "support/support.hpp"

using namespace imcrawler;
using namespace imcrawler::pipeline;
using testing::TempDir;

namespace {

const std::string kUrl = "http://h:1/profile/";

// Raw profile block with sensible defaults; `over` replaces field values.
std::string profile_block(const std::string& id, std::size_t seed = 1,
                          const std::map<std::string, std::string>& over = {})
{
    std::map<std::string, std::string> v = {
        {"profile_id", id},
        {"friend_count", "42"},
        {"basic_information.gender", "<span>Female</span>"},
        {"basic_information.birthday", "4 March 1990"},
        {"basic_information.email", "a@example.com"},
        {"basic_information.phone", "NOT_DISCLOSED"},
        {"places_lived.hometown", "Goa"},
        {"places_lived.current_city", "<span>Delhi</span>"},
        {"family_and_relationship.relationship_status", "In a relationship"},
        {"family_and_relationship.family_members", "[\"u7\"]"},
        {"pages_liked", "[\"<b>Chai</b> Lovers\"]"},
        {"groups_joined", "NOT_DISCLOSED"},
        {"page_complete", "1"}};
    for (const auto& [k, x] : over)
        v[k] = x;
    std::string out;
    for (const auto& name : profile_field_names())
        out += csv::format_row({"profile", kUrl + id, std::to_string(seed), name, v.at(name), "T"});
    return out;
}

std::string post_block(const std::string& id, std::size_t index, std::size_t seed = 1,
                       const std::map<std::string, std::string>& over = {})
{
    std::map<std::string, std::string> v = {{"type", "video"},
                                            {"title", "<b>Title</b>"},
                                            {"content", "Hello &amp; bye"},
                                            {"date", "4 March 2019"},
                                            {"time", "9:05"},
                                            {"tags", "[\"u3\"]"},
                                            {"reactions", "15"},
                                            {"emotions", "[\"like 12\",\"wow 3\"]"},
                                            {"comments", "12 comments"},
                                            {"shares", "1.2K shares"},
                                            {"views", "3,400 views"}};
    for (const auto& [k, x] : over)
        v[k] = x;
    std::string out;
    for (const auto& name : post_field_names())
        out += csv::format_row(
            {"post", kUrl + id, std::to_string(seed), std::to_string(index) + "." + name, v.at(name), "T"});
    return out;
}

Structured normalize_text(const std::string& body)
{
    std::istringstream in(std::string(kRawHeader) + "\n" + body);
    return normalize_raw(in);
}

const CheckResult* failed(const VerificationReport& r, const std::string& name)
{
    for (const auto& c : r.checks)
        if (c.name == name && !c.passed)
            return &c;
    return nullptr;
}

std::string file_bytes(const fs::path& p) { return read_text_file(p); }

} // namespace

TEST_CASE("counts and dates")
{
    CHECK(parse_count("1.2K") == 1200);
    CHECK(parse_count("15K") == 15000);
    CHECK(parse_count("1.5M") == 1500000);
    CHECK(parse_count("1,234") == 1234);
    CHECK(parse_count("1.2345K") == 1235);  // 1234.5 rounds half up
    CHECK(parse_count("0") == 0);
    CHECK_FALSE(parse_count("banana"));
    CHECK_FALSE(parse_count("-3"));
    CHECK_FALSE(parse_count(""));
    CHECK(parse_date("4 March 2019") == "2019-03-04");
    CHECK(parse_date("2019-03-04") == "2019-03-04");
    CHECK_FALSE(parse_date("31 February 2019"));
    CHECK(parse_clock("9:05") == "09:05");
    CHECK_FALSE(parse_clock("25:00"));
}

TEST_CASE("cell codec round trips")
{
    std::vector<TextField> texts = {TextField::of("plain"), TextField::of("a,b \"q\""),
                                    TextField::marked(FieldState::NotDisclosed), TextField::marked(FieldState::Missing),
                                    TextField::marked(FieldState::NotPresent),
                                    TextField::marked(FieldState::Unparseable, "x<y")};
    for (const auto& t : texts)
        CHECK(decode_text(encode(t)) == t);
    CHECK(decode_int(encode(IntField::of(1200))) == IntField::of(1200));
    CHECK(decode_list(encode(ListField::of({"a", "b,c"}))) == ListField::of({"a", "b,c"}));
    CHECK(decode_count_map(encode(CountMapField::of({{"like", 3}}))) == CountMapField::of({{"like", 3}}));
    CHECK(encode(IntField::marked(FieldState::Unparseable, "banana")) == "UNPARSEABLE:banana");
}

TEST_CASE("normalize: markup stripped and fields typed")
{
    auto data = normalize_text(profile_block("u1") + post_block("u1", 1));
    REQUIRE(data.profiles.size() == 1);
    const auto& p = data.profiles[0];
    CHECK(p.profile_id == "u1");
    CHECK(p.current_city == TextField::of("Delhi"));
    CHECK(p.gender == TextField::of("female"));
    CHECK(p.birthday == TextField::of("1990-03-04"));
    CHECK(p.relationship_status == TextField::of("in_a_relationship"));
    CHECK(p.phone.state == FieldState::NotDisclosed);
    CHECK(p.pages_liked == ListField::of({"Chai Lovers"}));
    CHECK(p.friend_count == IntField::of(42));
    CHECK(p.page_complete);
    REQUIRE(data.posts.size() == 1);
    const auto& q = data.posts[0];
    CHECK(q.title == TextField::of("Title"));
    CHECK(q.content == TextField::of("Hello & bye"));
    CHECK(q.share_count == IntField::of(1200));
    CHECK(q.view_count == IntField::of(3400));
    CHECK(q.comment_count == IntField::of(12));
    CHECK(q.time == TextField::of("09:05"));
    CHECK(q.emotion_counts == CountMapField::of({{"like", 12}, {"wow", 3}}));
    CHECK(data.skipped.empty());
    CHECK(data.raw_rows == data.consumed_rows);
}

TEST_CASE("normalize: unparseable values are kept and flagged")
{
    auto data = normalize_text(profile_block("u1", 1, {{"friend_count", "banana"}}) +
                               post_block("u1", 1, 1, {{"shares", "lots"}}));
    REQUIRE(data.profiles.size() == 1);
    CHECK(data.profiles[0].friend_count.state == FieldState::Unparseable);
    CHECK(data.profiles[0].friend_count.raw == "banana");
    REQUIRE(data.posts.size() == 1);
    CHECK(data.posts[0].share_count.state == FieldState::Unparseable);
}

TEST_CASE("normalize: bad rows are reported, never lost")
{
    std::string body = profile_block("u1");
    body += "profile,not a url,1,profile_id,x,T\n";
    body += "profile,http://h:1/profile/u1,one,friend_count,3,T\n";
    body += "comment,http://h:1/profile/u1,1,x,y,T\n";
    body += "post,http://h:1/profile/u1,1,title,x,T\n";
    body += "only,three,fields\n";
    body += csv::format_row({"profile", kUrl + "u9", "1", "friend_count", "1", "T"});  // orphan
    auto data = normalize_text(body);
    CHECK(data.profiles.size() == 1);
    CHECK(data.skipped.size() == 6);
    CHECK(data.raw_rows == data.consumed_rows + data.skipped.size());
    CHECK(data.skipped[0].line_no == profile_field_names().size() + 2);
}

TEST_CASE("normalize: conservation under random corruption")
{
    Rng rng(8);
    for (int round = 0; round < 60; ++round) {
        std::string body;
        for (int p = 0; p < 4; ++p) {
            auto block = profile_block("u" + std::to_string(p), 1 + rng.below(2)) +
                         post_block("u" + std::to_string(p), 1 + rng.below(3));
            auto lines = split(block, '\n');
            for (auto& line : lines) {
                if (line.empty())
                    continue;
                if (rng.chance(1, 10))
                    line = line.substr(0, rng.below(line.size()));
                if (rng.chance(1, 30))
                    continue;
                body += line + "\n";
            }
        }
        auto data = normalize_text(body);
        CHECK(data.raw_rows == data.consumed_rows + data.skipped.size());
    }
}

TEST_CASE("normalize: missing file and bad header")
{
    CHECK_THROWS_AS(normalize_raw("/nonexistent/raw.csv"), Error);
    std::istringstream in("a,b,c\n");
    try {
        normalize_raw(in);
        FAIL("expected BadRawHeader");
    } catch (const Error& e) {
        CHECK(e.code() == "BadRawHeader");
    }
}

TEST_CASE("structured CSV round trip")
{
    TempDir dir;
    auto data = normalize_text(profile_block("u1") + post_block("u1", 1) + post_block("u1", 2) +
                               profile_block("u2", 2, {{"friend_count", "??"}}) + "x,y\n");
    write_structured(dir.path(), data);
    auto back = read_structured(dir.path());
    CHECK(back.profiles == data.profiles);
    CHECK(back.posts == data.posts);
    CHECK(back.skipped == data.skipped);
}

TEST_CASE("verify: verdicts")
{
    VerificationPolicy policy;
    policy.total_post = 2;
    auto data = normalize_text(profile_block("ok") + post_block("ok", 1) + post_block("ok", 2) +
                               profile_block("bad", 1, {{"friend_count", "banana"}}) +
                               profile_block("cut", 1, {{"page_complete", "0"}, {"groups_joined", "MISSING"}}) +
                               profile_block("many") + post_block("many", 1) + post_block("many", 3) +
                               profile_block("sum") + post_block("sum", 1, 1, {{"reactions", "16"}}));
    auto reports = verify(data, policy);
    REQUIRE(reports.size() == 5);
    CHECK(reports[0].verdict == Verdict::Ok);
    CHECK(reports[1].junk());
    CHECK(failed(reports[1], "friend_count_parseable"));
    CHECK(failed(reports[1], "no_unparseable"));
    CHECK(reports[2].junk());
    CHECK(failed(reports[2], "page_complete"));
    CHECK(failed(reports[2], "sections_complete"));
    CHECK(reports[3].junk());
    CHECK(failed(reports[3], "posts_within_limit"));
    // Advisory only: flagged, not junk.
    CHECK(reports[4].verdict == Verdict::Ok);
    CHECK(failed(reports[4], "reaction_total_consistent"));
    for (const auto& r : reports) {
        bool required_failed = false;
        for (const auto& c : r.checks)
            required_failed |= c.required && !c.passed;
        CHECK(r.junk() == required_failed);
    }
}

TEST_CASE("verify: page id must match the url")
{
    auto data = normalize_text(profile_block("u1", 1, {{"profile_id", "u2"}}));
    auto reports = verify(data, {});
    CHECK(reports[0].junk());
    CHECK(failed(reports[0], "profile_id_present"));
}

TEST_CASE("re-extraction list")
{
    TempDir dir;
    std::string body;
    for (int i = 0; i < 100; ++i)
        body += profile_block("u" + std::to_string(i), 1,
                              i % 25 == 3 ? std::map<std::string, std::string>{{"page_complete", "0"}}
                                          : std::map<std::string, std::string>{});
    auto reports = verify(normalize_text(body), {});
    CHECK(emit_reextract_list(reports, dir / "redo.txt") == 4);
    auto links = read_links_file(dir / "redo.txt");
    CHECK(links.urls == std::vector<std::string>{kUrl + "u3", kUrl + "u28", kUrl + "u53", kUrl + "u78"});

    auto clean = verify(normalize_text(profile_block("u1")), {});
    CHECK(emit_reextract_list(clean, dir / "none.txt") == 0);
    CHECK(read_text_file(dir / "none.txt").empty());

    write_reports(dir / "report.csv", reports);
    auto back = read_reports(dir / "report.csv");
    REQUIRE(back.size() == reports.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].profile_id == reports[i].profile_id);
        CHECK(back[i].verdict == reports[i].verdict);
    }
}

TEST_CASE("store: first write wins")
{
    TempDir dir;
    Store store(dir / "s.db");
    auto a = normalize_text(profile_block("u1", 1)).profiles[0];
    auto b = normalize_text(profile_block("u1", 2, {{"places_lived.current_city", "Pune"}})).profiles[0];
    CHECK(store.insert(a) == InsertResult::Inserted);
    CHECK(store.insert(a) == InsertResult::Duplicate);
    CHECK(store.conflicts() == 0);
    CHECK(store.insert(b) == InsertResult::Duplicate);
    CHECK(store.conflicts() == 1);
    CHECK(store.profile_count() == 1);
    CHECK(store.profile("u1") == a);
    auto post = normalize_text(profile_block("u1") + post_block("u1", 1)).posts[0];
    CHECK(store.insert(post) == InsertResult::Inserted);
    CHECK(store.insert(post) == InsertResult::Duplicate);
    CHECK(store.post_count() == 1);
    CHECK(store.posts()[0] == post);
}

TEST_CASE("store: concurrent inserts of one key have one winner")
{
    TempDir dir;
    Store store(dir / "s.db");
    std::vector<ProfileRecord> records;
    for (int i = 0; i < 50; ++i)
        records.push_back(normalize_text(profile_block("u" + std::to_string(i))).profiles[0]);
    constexpr int kThreads = 6;
    std::vector<std::vector<int>> wins(kThreads, std::vector<int>(records.size()));
    std::vector<std::thread> threads;
    for (int t = 0; t < kThreads; ++t)
        threads.emplace_back([&, t] {
            for (std::size_t i = 0; i < records.size(); ++i)
                wins[t][i] = store.insert(records[i]) == InsertResult::Inserted;
        });
    for (auto& th : threads)
        th.join();
    for (std::size_t i = 0; i < records.size(); ++i) {
        int total = 0;
        for (int t = 0; t < kThreads; ++t)
            total += wins[t][i];
        CHECK(total == 1);
    }
    CHECK(store.profile_count() == records.size());
}

TEST_CASE("load: junk skipped, reruns change nothing")
{
    TempDir dir;
    auto data = normalize_text(profile_block("u1") + post_block("u1", 1) +
                               profile_block("u2", 1, {{"page_complete", "0"}}) + post_block("u2", 1) +
                               profile_block("u1", 2) + post_block("u1", 1, 2) + profile_block("u3"));
    auto reports = verify(data, {});
    {
        Store store(dir / "s.db");
        auto rep = load(store, data, &reports);
        CHECK(rep.profiles_inserted == 2);
        CHECK(rep.profiles_duplicate == 1);
        CHECK(rep.skipped_junk == 1);
        CHECK(rep.posts_inserted == 1);
        CHECK(rep.posts_duplicate == 1);
        CHECK(store.profile("u2") == std::nullopt);
    }
    const auto before = file_bytes(dir / "s.db");
    for (int i = 0; i < 3; ++i) {
        Store store(dir / "s.db");
        auto rep = load(store, data, &reports);
        CHECK(rep.profiles_inserted == 0);
        CHECK(rep.posts_inserted == 0);
    }
    CHECK(file_bytes(dir / "s.db") == before);
}

TEST_CASE("load: records with markup or empty values stay out")
{
    TempDir dir;
    auto data = normalize_text(profile_block("u1"));
    data.profiles[0].hometown = TextField::of("<b>Goa</b>");
    auto empty = data.profiles[0];
    empty.profile_id = "u2";
    empty.hometown = TextField::of("");
    data.profiles.push_back(empty);
    Store store(dir / "s.db");
    auto rep = load(store, data);
    CHECK(rep.skipped_invalid == 2);
    CHECK(store.profile_count() == 0);
}

TEST_CASE("filter by city")
{
    TempDir dir;
    Store store(dir / "s.db");
    auto data = normalize_text(profile_block("a", 1, {{"places_lived.current_city", " delhi "}}) +
                               profile_block("b", 1, {{"places_lived.current_city", "Pune"}}) +
                               profile_block("c", 1, {{"places_lived.current_city", "NOT_DISCLOSED"}}) +
                               profile_block("d", 1, {{"places_lived.current_city", "Kochi"}}));
    load(store, data);
    auto ids = [](const std::vector<ProfileRecord>& v) {
        std::vector<std::string> out;
        for (const auto& r : v)
            out.push_back(r.profile_id);
        return out;
    };
    CHECK(ids(filter_by_city(store, {"Bangalore", "Delhi", "Mumbai", "Pune"})) == std::vector<std::string>{"a", "b"});
    CHECK(filter_by_city(store, {}).empty());
    CHECK(filter_by_city(store, {"NOT_DISCLOSED"}).empty());
}

TEST_CASE("behavior summary")
{
    TempDir dir;
    Store store(dir / "s.db");
    auto data = normalize_text(profile_block("a") + post_block("a", 1) + post_block("a", 2, 1, {{"type", "text"}}) +
                               profile_block("b", 1, {{"basic_information.email", "NOT_DISCLOSED"}}) +
                               post_block("b", 1, 1, {{"type", "photo"}, {"tags", "[]"}}));
    load(store, data);
    auto s = behavior_summary(store, {"a", "b"});
    CHECK(s["population"] == 2);
    CHECK(s["disclosure"]["gender"]["rate"] == 1.0);
    CHECK(s["disclosure"]["email"]["rate"] == 0.5);
    CHECK(s["disclosure"]["phone"]["rate"] == 0.0);
    for (const auto& attr : disclosure_attributes()) {
        const auto& d = s["disclosure"][attr];
        CHECK(d["disclosed"].get<int>() + d["not_disclosed"].get<int>() + d["unknown"].get<int>() == 2);
        CHECK(d["rate"].get<double>() >= 0.0);
        CHECK(d["rate"].get<double>() <= 1.0);
    }
    std::int64_t by_type = 0;
    for (const auto& [k, v] : s["posts"]["by_type"].items())
        by_type += v.get<std::int64_t>();
    CHECK(by_type == 3);
    CHECK(s["posts"]["total"] == 3);
    CHECK(s["posts"]["tagged_posts"] == 2);
    CHECK_THROWS_AS(behavior_summary(store, {}), Error);
    CHECK_THROWS_AS(behavior_summary(store, {"zzz"}), Error);
}
