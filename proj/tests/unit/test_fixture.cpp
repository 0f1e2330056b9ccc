#include <doctest.h>

#include <regex>

#include <httplib.h>

#include "imcrawler/fixture/render.hpp"
#include "support/support.hpp"

using namespace imcrawler;
using namespace imcrawler::fixture;
using testing::make_network;

namespace {

std::vector<std::string> hrefs(const std::string& html, const std::string& cls)
{
    std::vector<std::string> out;
    std::regex re("class=\"" + cls + "\" href=\"([^\"]*)\"");
    for (std::sregex_iterator it(html.begin(), html.end(), re), end; it != end; ++it)
        out.push_back((*it)[1]);
    return out;
}

// Profile with exactly `friends` friends: a hub joined to fresh leaves.
FixtureNetwork hub_network(std::size_t friends, std::uint64_t seed = 3)
{
    auto net = make_network(friends + 10, 2.0, seed);
    const auto hub = net.profile(0).profile_id;
    for (std::size_t i = 1; i < net.size() && net.neighbors(0).size() < friends; ++i)
        net.connect(hub, net.profile(i).profile_id);
    return net;
}

std::set<std::string> truth_strings(const FixtureProfile& p)
{
    std::set<std::string> s = {p.email, p.phone, p.hometown, p.current_city, iso_date(p.birthday),
                               human_date(p.birthday)};
    for (const auto& x : p.pages_liked)
        s.insert(x);
    for (const auto& x : p.groups_joined)
        s.insert(x);
    for (const auto& post : p.posts)
        s.insert(post.content);
    s.erase("");
    return s;
}

} // namespace

TEST_CASE("generate: single node")
{
    auto net = make_network(1, 5.0, 9);
    CHECK(net.size() == 1);
    CHECK(net.edge_count() == 0);
    auto t = ground_truth(net);
    CHECK(t.profiles.size() == 2);
    CHECK(t.adjacency.size() == 1);
}

TEST_CASE("generate: same seed gives identical bytes")
{
    auto a = serialize(make_network(500, 20.0, 42));
    auto b = serialize(make_network(500, 20.0, 42));
    CHECK(a == b);
    CHECK(serialize(make_network(500, 20.0, 43)) != a);
}

TEST_CASE("generate: realized mean degree")
{
    auto net = make_network(1000, 20.0, 7);
    auto t = ground_truth(net);
    // Degree sum from the adjacency table: every edge row counts twice.
    const double mean = 2.0 * static_cast<double>(t.adjacency.size() - 1) / 1000.0;
    CHECK(mean >= 17.0);
    CHECK(mean <= 23.0);
}

TEST_CASE("generate: graph and post invariants")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto net = make_network(150, 6.0, seed);
        auto t = ground_truth(net);
        std::set<std::pair<std::string, std::string>> edges;
        for (std::size_t i = 1; i < t.adjacency.size(); ++i) {
            const auto& a = t.adjacency[i][0];
            const auto& b = t.adjacency[i][1];
            CHECK(a != b);
            CHECK(net.contains(a));
            CHECK(net.contains(b));
            CHECK(edges.insert({std::min(a, b), std::max(a, b)}).second);
            CHECK(net.connected(a, b));
            CHECK(net.connected(b, a));
        }
        for (const auto& p : net.nodes()) {
            for (std::size_t k = 1; k < p.posts.size(); ++k) {
                const auto& newer = p.posts[k - 1];
                const auto& older = p.posts[k];
                auto key = [](const FixturePost& x) {
                    return std::pair(std::chrono::sys_days(x.date), x.minute_of_day);
                };
                CHECK(key(older) <= key(newer));
            }
            for (const auto& post : p.posts) {
                CHECK(post.view_count.has_value() == (post.type == PostType::Video));
                CHECK(post.comment_count >= 0);
                CHECK(post.share_count >= 0);
                for (const auto& [k, v] : post.reactions)
                    CHECK(v >= 0);
            }
        }
    }
}

TEST_CASE("generate: bad parameters")
{
    GeneratorParams p;
    p.n_profiles = 0;
    CHECK_THROWS_AS(generate_network(p), FixtureError);
    p.n_profiles = 10;
    p.disclosure_rate = 1.5;
    CHECK_THROWS_AS(generate_network(p), FixtureError);
    p.disclosure_rate = 0.5;
    p.city_weights = {{"Delhi", 0.0}};
    CHECK_THROWS_AS(generate_network(p), FixtureError);
}

TEST_CASE("serialize round trip")
{
    auto net = make_network(120, 8.0, 21);
    CHECK(deserialize(serialize(net)) == net);
}

TEST_CASE("ground truth: stable and lossless")
{
    auto net = make_network(200, 10.0, 4);
    auto a = ground_truth(net);
    auto b = ground_truth(net);
    CHECK(a == b);
    CHECK(a.adjacency.size() - 1 == net.edge_count());
    auto rebuilt = network_from_truth(a);
    CHECK(ground_truth(rebuilt) == a);
    testing::TempDir dir;
    write_truth(a, dir.path());
    CHECK(read_truth(dir.path()) == a);
}

TEST_CASE("render: empty profile")
{
    FixtureNetwork net;
    FixtureProfile p;
    p.profile_id = "lonely";
    net.add_profile(p);
    auto pages = render_profile_pages(net, "lonely", 10);
    REQUIRE(pages.size() == 3);
    CHECK(pages[0].kind == HtmlPage::Kind::About);
    CHECK(pages[1].kind == HtmlPage::Kind::Friends);
    CHECK(pages[2].kind == HtmlPage::Kind::Timeline);
    for (const auto& page : pages) {
        CHECK_FALSE(page.has_next);
        CHECK(page.html.find("next-page") == std::string::npos);
    }
    CHECK(hrefs(pages[1].html, "friend-link").empty());
}

TEST_CASE("render: 501 friends at page size 100")
{
    auto net = hub_network(501);
    const auto id = net.profile(0).profile_id;
    REQUIRE(net.neighbors(0).size() == 501);
    auto pages = render_profile_pages(net, id, 100);
    std::vector<HtmlPage> friends;
    for (auto& p : pages)
        if (p.kind == HtmlPage::Kind::Friends)
            friends.push_back(p);
    REQUIRE(friends.size() == 6);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(friends[i].has_next == (i < 5));
    CHECK_THROWS_AS(render_friends_page(net, "nobody", 1, 100), FixtureError);
}

TEST_CASE("render: friend pages partition the adjacency list")
{
    auto net = make_network(300, 12.0, 8);
    auto adj = testing::truth_adjacency(ground_truth(net));
    for (std::size_t page_size : {1, 7, 50}) {
        for (const auto& p : net.nodes()) {
            std::vector<std::string> seen;
            for (std::size_t k = 1;; ++k) {
                auto page = render_friends_page(net, p.profile_id, k, page_size);
                for (const auto& h : hrefs(page.html, "friend-link"))
                    seen.push_back(h.substr(std::string("/profile/").size()));
                if (!page.has_next)
                    break;
            }
            CHECK(seen == adj.at(p.profile_id));
        }
    }
}

TEST_CASE("render: timeline page count bounds")
{
    auto net = make_network(100, 4.0, 12, 0.6, 60);
    for (std::size_t page_size : {1, 5, 20}) {
        for (const auto& p : net.nodes()) {
            std::size_t pages = 0;
            for (const auto& page : render_profile_pages(net, p.profile_id, page_size))
                pages += page.kind == HtmlPage::Kind::Timeline;
            const auto posts = p.posts.size();
            if (posts == 0) {
                CHECK(pages == 1);
                continue;
            }
            CHECK(pages * page_size >= posts);
            CHECK(posts > (pages - 1) * page_size);
        }
    }
}

TEST_CASE("render: undisclosed fields are omitted")
{
    auto net = make_network(200, 5.0, 13);
    int checked = 0;
    for (const auto& p : net.nodes()) {
        auto html = render_about(net, p);
        CHECK((html.find("data-field=\"email\"") != std::string::npos) == p.discloses(Attribute::Email));
        if (!p.discloses(Attribute::Email)) {
            CHECK(html.find(p.email) == std::string::npos);
            ++checked;
        }
        if (!p.discloses(Attribute::Phone))
            CHECK(html.find(p.phone) == std::string::npos);
    }
    CHECK(checked > 0);
}

TEST_CASE("format_count abbreviations parse back exactly")
{
    CHECK(format_count(999) == "999");
    CHECK(format_count(1200) == "1.2K");
    CHECK(format_count(1234) == "1,234");
    CHECK(format_count(15000) == "15K");
    CHECK(format_count(1500000) == "1.5M");
}

TEST_CASE("serve: auth, pages and truth")
{
    testing::Served served(make_network(60, 6.0, 17));
    const auto& net = *served.network;
    const auto& u5 = net.profile("u5");
    httplib::Client cli(served.endpoint());

    auto wall = cli.Get("/profile/u5/about");
    REQUIRE(wall);
    CHECK(wall->status == 401);
    for (const auto& p : net.nodes())
        for (const auto& s : truth_strings(p))
            CHECK_MESSAGE(wall->body.find(s) == std::string::npos, s);
    for (const char* path : {"/profile/u5/friends?page=1", "/profile/u5/timeline?page=1"}) {
        auto r = cli.Get(path);
        REQUIRE(r);
        CHECK(r->status == 401);
        CHECK(r->body == wall->body);
    }

    auto bad = cli.Post("/login", httplib::Params{{"login", u5.login_name}, {"secret", "wrong"}});
    REQUIRE(bad);
    CHECK(bad->status == 401);

    auto login = cli.Post("/login", httplib::Params{{"login", u5.login_name}, {"secret", u5.secret}});
    REQUIRE(login);
    REQUIRE(login->status == 200);
    auto token = nlohmann::json::parse(login->body).at("token").get<std::string>();
    CHECK_FALSE(token.empty());
    httplib::Headers cookie = {{"Cookie", "session=" + token}};

    auto about = cli.Get("/profile/u5/about", cookie);
    REQUIRE(about);
    CHECK(about->status == 200);
    CHECK(about->body == render_about(net, u5));
    auto missing = cli.Get("/profile/nobody/about", cookie);
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto past_end = cli.Get("/profile/u5/friends?page=99", cookie);
    REQUIRE(past_end);
    CHECK(past_end->status == 404);

    auto truth = cli.Get("/truth/u5");
    REQUIRE(truth);
    CHECK(truth->status == 200);
    auto j = nlohmann::json::parse(truth->body);
    CHECK(profile_from_json(j) == u5);
    CHECK(j == profile_to_json(u5, net.friends_of("u5")));

    auto logout = cli.Post("/logout", cookie, "", "text/plain");
    REQUIRE(logout);
    CHECK(logout->status == 200);
    auto after = cli.Get("/profile/u5/about", cookie);
    REQUIRE(after);
    CHECK(after->status == 401);
    auto c = served.server->counters();
    CHECK(c.logins == 1);
    CHECK(c.logouts == 1);
}

TEST_CASE("serve: truth endpoint can be disabled")
{
    ServeOptions o;
    o.truth_enabled = false;
    testing::Served served(make_network(10, 2.0, 1), o);
    httplib::Client cli(served.endpoint());
    auto r = cli.Get("/truth/u1");
    REQUIRE(r);
    CHECK(r->status == 404);
}

TEST_CASE("serve: bind failure")
{
    testing::Served first(make_network(5, 1.0, 1));
    FixtureServer second(first.network);
    try {
        second.start("127.0.0.1", first.server->port());
        FAIL("expected BindFailure");
    } catch (const FixtureError& e) {
        CHECK(e.kind() == FixtureError::Kind::BindFailure);
    }
}

TEST_CASE("truncation plan is deterministic and near the rate")
{
    auto net = make_network(4000, 3.0, 2);
    auto a = plan_truncation(net, 0.05, 9);
    CHECK(a.truncate_about == plan_truncation(net, 0.05, 9).truncate_about);
    const double rate = static_cast<double>(a.truncate_about.size()) / 4000.0;
    CHECK(rate > 0.04);
    CHECK(rate < 0.06);
    CHECK(plan_truncation(net, 0.0, 9).truncate_about.empty());
}
