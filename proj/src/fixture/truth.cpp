#include "imcrawler/fixture/truth.hpp"

#include <unordered_map>

#include "imcrawler/util.hpp"

namespace imcrawler::fixture {

namespace {

using nlohmann::json;

csv::Row profile_header()
{
    csv::Row h = {"profile_id", "display_name",  "login_name",     "secret",         "gender",
                  "birthday",   "email",         "phone",          "relationship_status", "hometown",
                  "current_city", "family_members", "pages_liked", "groups_joined",  "friend_count",
                  "post_count"};
    for (auto a : kAttributes)
        h.push_back("disclosed_" + std::string(attribute_name(a)));
    return h;
}

csv::Row post_header()
{
    csv::Row h = {"profile_id", "post_index", "post_type", "title", "content", "date", "time", "comment_count"};
    for (auto k : kReactionKinds)
        h.push_back("reactions_" + std::string(k));
    for (const char* c : {"reaction_total", "share_count", "view_count", "tags"})
        h.emplace_back(c);
    return h;
}

std::string as_list(const std::vector<std::string>& v) { return json(v).dump(); }

std::vector<std::string> from_list(const std::string& s)
{
    return json::parse(s).get<std::vector<std::string>>();
}

std::int64_t to_int(const std::string& s)
{
    auto n = parse_int(s);
    if (!n)
        throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad integer in truth table: " + s);
    return *n;
}

} // namespace

TruthTables ground_truth(const FixtureNetwork& network)
{
    TruthTables t;
    t.profiles.push_back(profile_header());
    t.posts.push_back(post_header());
    t.adjacency.push_back({"profile_a", "profile_b"});

    for (std::size_t i = 0; i < network.size(); ++i) {
        const auto& p = network.profile(i);
        csv::Row row = {p.profile_id,
                        p.display_name,
                        p.login_name,
                        p.secret,
                        std::string(to_string(p.gender)),
                        iso_date(p.birthday),
                        p.email,
                        p.phone,
                        std::string(to_string(p.relationship_status)),
                        p.hometown,
                        p.current_city,
                        as_list(p.family_members),
                        as_list(p.pages_liked),
                        as_list(p.groups_joined),
                        std::to_string(network.neighbors(i).size()),
                        std::to_string(p.posts.size())};
        for (auto a : kAttributes)
            row.push_back(p.discloses(a) ? "1" : "0");
        t.profiles.push_back(std::move(row));

        for (std::size_t k = 0; k < p.posts.size(); ++k) {
            const auto& post = p.posts[k];
            csv::Row pr = {p.profile_id,
                           std::to_string(k + 1),
                           std::string(to_string(post.type)),
                           post.title,
                           post.content,
                           iso_date(post.date),
                           clock_time(post.minute_of_day),
                           std::to_string(post.comment_count)};
            for (auto kind : kReactionKinds)
                pr.push_back(std::to_string(post.reactions.at(std::string(kind))));
            pr.push_back(std::to_string(post.reaction_total()));
            pr.push_back(std::to_string(post.share_count));
            pr.push_back(post.view_count ? std::to_string(*post.view_count) : "");
            pr.push_back(as_list(post.tags));
            t.posts.push_back(std::move(pr));
        }
    }
    for (const auto& [a, b] : network.edges())
        t.adjacency.push_back({network.profile(a).profile_id, network.profile(b).profile_id});
    return t;
}

void write_truth(const TruthTables& tables, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    csv::write_file(dir / "profiles.csv", tables.profiles);
    csv::write_file(dir / "posts.csv", tables.posts);
    csv::write_file(dir / "adjacency.csv", tables.adjacency);
}

TruthTables read_truth(const std::filesystem::path& dir)
{
    return {csv::read_file(dir / "profiles.csv"), csv::read_file(dir / "posts.csv"),
            csv::read_file(dir / "adjacency.csv")};
}

FixtureNetwork network_from_truth(const TruthTables& tables)
{
    // Round-trip through the JSON profile form, which already knows how to
    // parse every typed field.
    const auto ph = profile_header();
    const auto qh = post_header();
    if (tables.profiles.empty() || tables.profiles[0] != ph || tables.posts.empty() || tables.posts[0] != qh)
        throw FixtureError(FixtureError::Kind::BadNetworkFile, "unexpected truth table header");

    std::vector<json> profiles;
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t r = 1; r < tables.profiles.size(); ++r) {
        const auto& row = tables.profiles[r];
        if (row.size() != ph.size())
            throw FixtureError(FixtureError::Kind::BadNetworkFile, "short profile row");
        json j;
        for (std::size_t c = 0; c < 11; ++c)
            j[ph[c]] = row[c];
        j["family_members"] = from_list(row[11]);
        j["pages_liked"] = from_list(row[12]);
        j["groups_joined"] = from_list(row[13]);
        json disclosed = json::object();
        for (std::size_t a = 0; a < kAttributeCount; ++a)
            disclosed[std::string(attribute_name(kAttributes[a]))] = row[16 + a] == "1";
        j["disclosed"] = disclosed;
        j["posts"] = json::array();
        by_id.emplace(row[0], profiles.size());
        profiles.push_back(std::move(j));
    }
    for (std::size_t r = 1; r < tables.posts.size(); ++r) {
        const auto& row = tables.posts[r];
        if (row.size() != qh.size() || !by_id.count(row[0]))
            throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad post row");
        json jp = {{"post_type", row[2]}, {"title", row[3]}, {"content", row[4]},
                   {"date", row[5]},      {"time", row[6]},  {"comment_count", to_int(row[7])}};
        json reactions = json::object();
        for (std::size_t k = 0; k < kReactionKinds.size(); ++k)
            reactions[std::string(kReactionKinds[k])] = to_int(row[8 + k]);
        jp["reactions"] = reactions;
        const auto base = 8 + kReactionKinds.size();
        jp["share_count"] = to_int(row[base + 1]);
        jp["view_count"] = row[base + 2].empty() ? json(nullptr) : json(to_int(row[base + 2]));
        jp["tags"] = from_list(row[base + 3]);
        profiles[by_id.at(row[0])]["posts"].push_back(std::move(jp));
    }

    FixtureNetwork net;
    for (const auto& j : profiles)
        net.add_profile(profile_from_json(j));
    for (std::size_t r = 1; r < tables.adjacency.size(); ++r) {
        const auto& row = tables.adjacency[r];
        if (row.size() != 2 || !net.connect(row[0], row[1]))
            throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad adjacency row");
    }
    return net;
}

} // namespace imcrawler::fixture
