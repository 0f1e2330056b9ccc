#include <doctest.h>

#include <sstream>

#include "imcrawler/crawl.hpp"
#include "imcrawler/extract.hpp"
#include "imcrawler/pipeline/normalize.hpp"
#include "support/support.hpp"

using namespace imcrawler;
using testing::make_network;
using testing::Served;

namespace {

std::string raw_csv(const RawProfileCapture& profile, const std::vector<RawPostCapture>& posts)
{
    std::string out = std::string(kRawHeader) + "\n";
    for (const auto& r : raw_rows(profile, posts))
        out += csv::format_row({r.capture_kind, r.profile_url, std::to_string(r.seed_index), r.field, r.value,
                                r.captured_at});
    return out;
}

struct Counted {
    std::size_t friends = 0;
    std::size_t timeline = 0;
    std::size_t about = 0;
};

SessionOptions counting(Counted& c)
{
    SessionOptions o;
    o.observer = [&c](const FetchEvent& e) {
        if (e.url.find("/friends") != std::string::npos)
            ++c.friends;
        else if (e.url.find("/timeline") != std::string::npos)
            ++c.timeline;
        else
            ++c.about;
    };
    return o;
}

fixture::FixtureNetwork hub_network(std::size_t friends)
{
    auto net = make_network(friends + 20, 2.0, 3);
    const auto hub = net.profile(0).profile_id;
    for (std::size_t i = 1; i < net.size() && net.neighbors(0).size() < friends; ++i)
        net.connect(hub, net.profile(i).profile_id);
    return net;
}

// Gives `id` exactly n posts by cycling its generated ones.
void set_post_count(fixture::FixtureNetwork& net, const std::string& id, std::size_t n)
{
    auto& p = net.mutable_profile(id);
    std::vector<fixture::FixturePost> pool = p.posts;
    if (pool.empty())
        pool.push_back(net.profile(1).posts.empty() ? fixture::FixturePost{} : net.profile(1).posts[0]);
    p.posts.clear();
    for (std::size_t i = 0; i < n; ++i)
        p.posts.push_back(pool[i % pool.size()]);
}

} // namespace

TEST_CASE("login")
{
    Served served(make_network(20, 3.0, 5));
    auto seed = testing::seed_for(*served.network, "u3");
    auto s = Session::login(seed, 1, served.endpoint());
    CHECK(s.live());
    CHECK_FALSE(s.token().empty());
    CHECK(s.seed_index() == 1);

    auto wrong = seed;
    wrong.secret = "nope";
    CHECK_THROWS_AS(Session::login(wrong, 1, served.endpoint()), BadCredentials);

    // A port nothing listens on.
    fixture::FixtureServer probe(served.network);
    probe.start("127.0.0.1", 0);
    auto dead = probe.endpoint();
    probe.stop();
    SessionOptions o;
    o.timeout = std::chrono::seconds(2);
    auto t0 = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(Session::login(seed, 1, dead, o), EndpointUnreachable);
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(10));
}

TEST_CASE("friend links: 501 friends over 6 pages")
{
    fixture::ServeOptions so;
    so.page_size = 100;
    Served served(hub_network(501), so);
    const auto& net = *served.network;
    const auto hub = net.profile(0).profile_id;
    Counted c;
    auto s = Session::login(testing::seed_for(net, "u1"), 1, served.endpoint(), counting(c));
    auto links = extract_friend_links(s, profile_url_for(served.endpoint(), hub));
    CHECK(links.size() == 501);
    CHECK(c.friends == 6);
    std::vector<std::string> want;
    for (const auto& f : testing::truth_adjacency(fixture::ground_truth(net)).at(hub))
        want.push_back(profile_url_for(served.endpoint(), f));
    CHECK(links.urls == want);

    auto about = extract_personal_attributes(s, profile_url_for(served.endpoint(), hub));
    REQUIRE(about.find("friend_count"));
    CHECK(*about.find("friend_count") == "501");
}

TEST_CASE("friend links: profile without friends")
{
    fixture::FixtureNetwork net = make_network(3, 0.5, 1);
    fixture::FixtureProfile lonely;
    lonely.profile_id = "lonely";
    net.add_profile(lonely);
    Served served(net);
    auto s = Session::login(testing::seed_for(*served.network, "u0"), 1, served.endpoint());
    CHECK(extract_friend_links(s, profile_url_for(served.endpoint(), "lonely")).empty());
}

TEST_CASE("friend links: session revoked mid-pagination")
{
    fixture::ServeOptions so;
    so.page_size = 10;
    Served served(hub_network(45), so);
    SessionOptions o;
    int pages = 0;
    o.observer = [&](const FetchEvent& e) {
        if (e.url.find("/friends") != std::string::npos && ++pages == 2)
            served.server->revoke_all_sessions();
    };
    auto s = Session::login(testing::seed_for(*served.network, "u1"), 1, served.endpoint(), o);
    try {
        extract_friend_links(s, profile_url_for(served.endpoint(), served.network->profile(0).profile_id));
        FAIL("expected AuthExpired");
    } catch (const AuthExpired& e) {
        CHECK(e.pages_fetched() == 2);
    }
}

TEST_CASE("personal attributes: disclosure markers")
{
    auto net = make_network(40, 4.0, 8);
    net.mutable_profile("u1").disclosed = fixture::DisclosureMask::all();
    net.mutable_profile("u2").disclosed = fixture::DisclosureMask::all();
    net.mutable_profile("u2").disclosed.set(fixture::Attribute::Email, false);
    Served served(net);
    auto s = Session::login(testing::seed_for(*served.network, "u0"), 1, served.endpoint());

    auto all = extract_personal_attributes(s, profile_url_for(served.endpoint(), "u1"));
    for (const auto& name : profile_field_names()) {
        REQUIRE(all.find(name));
        CHECK_MESSAGE(*all.find(name) != kNotDisclosed, name);
        CHECK_MESSAGE(!all.find(name)->empty(), name);
    }
    CHECK(*all.find("basic_information.email") == served.network->profile("u1").email);

    auto no_email = extract_personal_attributes(s, profile_url_for(served.endpoint(), "u2"));
    CHECK(*no_email.find("basic_information.email") == kNotDisclosed);
    CHECK(*no_email.find("basic_information.phone") != kNotDisclosed);

    try {
        extract_personal_attributes(s, profile_url_for(served.endpoint(), "ghost"));
        FAIL("expected FetchError");
    } catch (const FetchError& e) {
        CHECK(e.status() == 404);
    }
}

TEST_CASE("posts: min(total_post, posts) and lazy pagination")
{
    auto net = make_network(30, 3.0, 6, 0.6, 12);
    set_post_count(net, "u1", 7);
    set_post_count(net, "u2", 300);
    set_post_count(net, "u3", 0);
    set_post_count(net, "u4", 40);
    fixture::ServeOptions so;
    so.page_size = 20;
    Served served(net, so);
    Counted c;
    auto s = Session::login(testing::seed_for(*served.network, "u0"), 1, served.endpoint(), counting(c));
    struct Case {
        std::string id;
        std::int64_t total_post;
        std::size_t captures;
        std::size_t pages;
    };
    for (const auto& k : std::vector<Case>{{"u1", 25, 7, 1}, {"u2", 25, 25, 2}, {"u2", 20, 20, 1},
                                           {"u2", 21, 21, 2}, {"u4", 100, 40, 2}, {"u3", 5, 0, 1}}) {
        c = {};
        auto posts = extract_post_attributes(s, profile_url_for(served.endpoint(), k.id), k.total_post);
        CHECK(posts.size() == k.captures);
        CHECK(c.timeline == k.pages);
        for (std::size_t i = 0; i < posts.size(); ++i)
            CHECK(posts[i].post_index == i + 1);
    }
}

TEST_CASE("posts: views only on videos")
{
    auto net = make_network(50, 3.0, 10, 0.6, 20);
    Served served(net);
    auto s = Session::login(testing::seed_for(*served.network, "u0"), 1, served.endpoint());
    int videos = 0;
    int others = 0;
    for (const auto& p : served.network->nodes()) {
        auto posts = extract_post_attributes(s, profile_url_for(served.endpoint(), p.profile_id), 100);
        REQUIRE(posts.size() == p.posts.size());
        for (std::size_t i = 0; i < posts.size(); ++i) {
            const auto* views = posts[i].find("views");
            REQUIRE(views);
            if (p.posts[i].type == fixture::PostType::Video) {
                CHECK(*views != kNotPresent);
                ++videos;
            } else {
                CHECK(*views == kNotPresent);
                ++others;
            }
        }
    }
    CHECK(videos > 0);
    CHECK(others > 0);
}

TEST_CASE("one rule set extracts every profile of a seeded network")
{
    auto net = make_network(120, 6.0, 77, 0.5, 15);
    Served served(net);
    auto truth = fixture::ground_truth(*served.network);
    auto profiles = testing::truth_profiles(truth);
    auto posts = testing::truth_posts(truth);
    auto s = Session::login(testing::seed_for(*served.network, "u0"), 1, served.endpoint());
    for (const auto& p : served.network->nodes()) {
        const auto url = profile_url_for(served.endpoint(), p.profile_id);
        auto about = extract_personal_attributes(s, url);
        auto captured = extract_post_attributes(s, url, 100);
        std::istringstream in(raw_csv(about, captured));
        auto data = pipeline::normalize_raw(in);
        CHECK(data.skipped.empty());
        REQUIRE(data.profiles.size() == 1);
        CHECK_MESSAGE(testing::profile_mismatch(data.profiles[0], profiles.at(p.profile_id)).empty(),
                      p.profile_id, ": ", testing::profile_mismatch(data.profiles[0], profiles.at(p.profile_id)));
        REQUIRE(data.posts.size() == p.posts.size());
        for (const auto& post : data.posts) {
            auto why = testing::post_mismatch(post, posts.at({p.profile_id, post.post_index}));
            CHECK_MESSAGE(why.empty(), p.profile_id, "#", post.post_index, ": ", why);
        }
    }
}
