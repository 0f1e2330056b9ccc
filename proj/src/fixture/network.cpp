#include "imcrawler/fixture/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include <fmt/format.h>

#include "imcrawler/rng.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler::fixture {

namespace {

const char* kind_code(FixtureError::Kind k)
{
    switch (k) {
    case FixtureError::Kind::BadParameter: return "BadParameter";
    case FixtureError::Kind::UnknownProfile: return "UnknownProfile";
    case FixtureError::Kind::BadNetworkFile: return "BadNetworkFile";
    case FixtureError::Kind::BindFailure: return "BindFailure";
    }
    return "FixtureError";
}

ErrorCategory kind_category(FixtureError::Kind k)
{
    switch (k) {
    case FixtureError::Kind::BadParameter: return ErrorCategory::Param;
    case FixtureError::Kind::UnknownProfile: return ErrorCategory::Param;
    case FixtureError::Kind::BadNetworkFile: return ErrorCategory::Io;
    case FixtureError::Kind::BindFailure: return ErrorCategory::Io;
    }
    return ErrorCategory::Param;
}

const std::vector<std::string> kFirstNames = {
    "Aarav", "Vivaan", "Aditya", "Vihaan", "Arjun", "Sai",    "Reyansh", "Ayaan",  "Krishna", "Ishaan",
    "Ananya", "Diya",  "Aadhya", "Saanvi", "Myra",  "Anika",  "Kavya",   "Riya",   "Meera",   "Priya",
    "Rahul",  "Rohan", "Neha",   "Pooja",  "Karan", "Simran", "Vikram",  "Sneha",  "Nikhil",  "Tanvi"};
const std::vector<std::string> kLastNames = {
    "Sharma", "Verma", "Iyer",  "Reddy", "Nair",   "Patel", "Gupta",  "Singh", "Kulkarni", "Menon",
    "Rao",    "Joshi", "Desai", "Kapoor", "Mehta", "Bose",  "Chopra", "Pillai", "Shetty",  "Bhat"};
const std::vector<std::string> kOtherCities = {"Chennai", "Kolkata",  "Hyderabad",  "Jaipur", "Lucknow", "Ahmedabad",
                                               "Chandigarh", "Bhopal", "Indore", "Kochi",  "Nagpur",  "Surat"};
const std::vector<std::string> kHometowns = {"Mysore",  "Nashik",   "Varanasi", "Agra",    "Patna",  "Ranchi",
                                             "Udaipur", "Amritsar", "Madurai", "Guwahati", "Shimla", "Goa",
                                             "Pune",    "Delhi",    "Mumbai",  "Bangalore"};
const std::vector<std::string> kPages = {
    "Cricket Addicts",   "Bollywood Buzz",     "Street Food India", "Tech Crunchers",   "Travel Diaries",
    "Photography Club",  "Classical Ragas",    "Daily Memes",       "Startup Stories",  "Fitness First",
    "Book Lovers",       "Chai & Conversations", "Monsoon Moments", "Gadget Reviews",   "Indie Music Hub",
    "Yoga Every Day",    "Film Critics Circle", "Code Warriors",    "Art & Craft Ideas", "Football Fanatics"};
const std::vector<std::string> kGroups = {
    "Alumni Network 2012", "Weekend Trekkers",  "Flat Hunters", "Used Books Exchange", "Carpool Commuters",
    "Parents Forum",       "Board Game Nights", "Foodies United", "Photography Walks", "Coding Interview Prep",
    "Marathon Runners",    "Plant Parents"};
const std::vector<std::string> kWords = {
    "monsoon", "weekend", "coffee", "friends", "family", "trip",  "office", "movie", "cricket", "festival",
    "sunset",  "train",   "beach",  "dinner",  "music",  "rain",  "city",   "road",  "exam",    "wedding",
    "birthday", "market", "temple", "mountains", "project", "traffic", "biryani", "chai", "morning", "night"};

std::string make_sentence(Rng& rng, std::int64_t words)
{
    std::string s;
    for (std::int64_t i = 0; i < words; ++i) {
        if (i)
            s += ' ';
        s += rng.pick(kWords);
    }
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string post_content(Rng& rng)
{
    std::string content = make_sentence(rng, rng.between(4, 12)) + ".";
    switch (rng.below(6)) {
    case 0: content += " Chai & samosa time!"; break;
    case 1: content += " \"Best day ever\""; break;
    case 2: content += " Rain > sunshine, always."; break;
    default: break;
    }
    if (rng.chance(1, 3))
        content += " " + make_sentence(rng, rng.between(3, 8)) + ".";
    return content;
}

std::int64_t small_or_abbreviated(Rng& rng, std::int64_t small_max, std::uint64_t large_odds, std::int64_t large_hundreds_max)
{
    // Large values are multiples of 100 so that the rendered "1.2K" form
    // parses back exactly.
    if (rng.chance(1, large_odds))
        return 100 * rng.between(10, large_hundreds_max);
    return rng.between(0, small_max);
}

FixturePost make_post(Rng& rng, const std::string& first_name, const std::vector<std::uint32_t>& friends,
                      const std::vector<FixtureProfile>& nodes)
{
    FixturePost post;
    static const std::vector<std::uint64_t> type_weights = {40, 30, 15, 15};
    post.type = static_cast<PostType>(rng.weighted(type_weights));
    switch (post.type) {
    case PostType::Text: post.title = first_name + " updated their status"; break;
    case PostType::Photo: post.title = first_name + " shared a photo"; break;
    case PostType::Video: post.title = first_name + " shared a video"; break;
    case PostType::Link: post.title = first_name + " shared a link"; break;
    }
    post.content = post_content(rng);
    post.comment_count = small_or_abbreviated(rng, 60, 25, 300);
    for (auto kind : kReactionKinds) {
        std::int64_t n = 0;
        if (kind == "like")
            n = small_or_abbreviated(rng, 250, 15, 900);
        else if (rng.chance(1, 2))
            n = rng.between(0, 40);
        post.reactions.emplace(std::string(kind), n);
    }
    if (rng.chance(1, 100))
        post.share_count = 100'000 * rng.between(10, 30);
    else
        post.share_count = small_or_abbreviated(rng, 50, 12, 2000);
    if (post.type == PostType::Video)
        post.view_count = small_or_abbreviated(rng, 999, 2, 99'999);
    if (!friends.empty()) {
        auto n_tags = static_cast<std::size_t>(rng.weighted({60, 25, 15}));
        for (std::size_t i = 0; i < n_tags && i < friends.size(); ++i) {
            const auto& id = nodes[friends[rng.below(friends.size())]].profile_id;
            if (std::find(post.tags.begin(), post.tags.end(), id) == post.tags.end())
                post.tags.push_back(id);
        }
    }
    return post;
}

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

template <class T>
std::vector<T> sample_distinct(Rng& rng, const std::vector<T>& pool, std::size_t count)
{
    std::vector<T> items = pool;
    count = std::min(count, items.size());
    for (std::size_t i = 0; i < count; ++i)
        std::swap(items[i], items[i + rng.below(items.size() - i)]);
    items.resize(count);
    return items;
}

} // namespace

FixtureError::FixtureError(Kind kind, const std::string& detail)
    : Error(kind_category(kind), kind_code(kind), std::string(kind_code(kind)) + ": " + detail), kind_(kind)
{
}

std::string_view to_string(Gender g)
{
    switch (g) {
    case Gender::Male: return "male";
    case Gender::Female: return "female";
    case Gender::Unspecified: return "unspecified";
    }
    return "unspecified";
}

std::string_view to_string(Relationship r)
{
    switch (r) {
    case Relationship::Single: return "single";
    case Relationship::InARelationship: return "in_a_relationship";
    case Relationship::Engaged: return "engaged";
    case Relationship::Married: return "married";
    case Relationship::Complicated: return "its_complicated";
    }
    return "single";
}

std::string_view to_string(PostType t)
{
    switch (t) {
    case PostType::Text: return "text";
    case PostType::Photo: return "photo";
    case PostType::Video: return "video";
    case PostType::Link: return "link";
    }
    return "text";
}

std::optional<Gender> gender_from_string(std::string_view s)
{
    for (auto g : {Gender::Male, Gender::Female, Gender::Unspecified})
        if (to_string(g) == s)
            return g;
    return std::nullopt;
}

std::optional<Relationship> relationship_from_string(std::string_view s)
{
    for (auto r : {Relationship::Single, Relationship::InARelationship, Relationship::Engaged, Relationship::Married,
                   Relationship::Complicated})
        if (to_string(r) == s)
            return r;
    return std::nullopt;
}

std::optional<PostType> post_type_from_string(std::string_view s)
{
    for (auto t : {PostType::Text, PostType::Photo, PostType::Video, PostType::Link})
        if (to_string(t) == s)
            return t;
    return std::nullopt;
}

std::string_view attribute_name(Attribute a)
{
    switch (a) {
    case Attribute::Gender: return "gender";
    case Attribute::Birthday: return "birthday";
    case Attribute::Email: return "email";
    case Attribute::Phone: return "phone";
    case Attribute::RelationshipStatus: return "relationship_status";
    case Attribute::Hometown: return "hometown";
    case Attribute::CurrentCity: return "current_city";
    case Attribute::FamilyMembers: return "family_members";
    case Attribute::PagesLiked: return "pages_liked";
    case Attribute::GroupsJoined: return "groups_joined";
    }
    return "";
}

std::string iso_date(const Date& d)
{
    return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                       static_cast<unsigned>(d.day()));
}

std::string human_date(const Date& d)
{
    static const char* months[] = {"January", "February", "March",     "April",   "May",      "June",
                                   "July",    "August",   "September", "October", "November", "December"};
    return fmt::format("{} {} {}", static_cast<unsigned>(d.day()), months[static_cast<unsigned>(d.month()) - 1],
                       static_cast<int>(d.year()));
}

std::string clock_time(int minute_of_day)
{
    return fmt::format("{:02}:{:02}", minute_of_day / 60, minute_of_day % 60);
}

std::int64_t FixturePost::reaction_total() const
{
    std::int64_t total = 0;
    for (const auto& [_, n] : reactions)
        total += n;
    return total;
}

std::vector<std::pair<std::string, double>> GeneratorParams::default_city_weights()
{
    return {{"Bangalore", 6.0}, {"Delhi", 6.5}, {"Mumbai", 6.0}, {"Pune", 4.5}, {"other", 77.0}};
}

const FixtureProfile& FixtureNetwork::profile(std::string_view id) const
{
    auto idx = index_of(id);
    if (!idx)
        throw FixtureError(FixtureError::Kind::UnknownProfile, std::string(id));
    return nodes_[*idx];
}

FixtureProfile& FixtureNetwork::mutable_profile(std::string_view id)
{
    auto idx = index_of(id);
    if (!idx)
        throw FixtureError(FixtureError::Kind::UnknownProfile, std::string(id));
    return nodes_[*idx];
}

std::optional<std::size_t> FixtureNetwork::index_of(std::string_view id) const
{
    auto it = index_.find(std::string(id));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

std::vector<std::string> FixtureNetwork::friends_of(std::string_view id) const
{
    auto idx = index_of(id);
    if (!idx)
        throw FixtureError(FixtureError::Kind::UnknownProfile, std::string(id));
    std::vector<std::string> out;
    out.reserve(adjacency_[*idx].size());
    for (auto n : adjacency_[*idx])
        out.push_back(nodes_[n].profile_id);
    return out;
}

bool FixtureNetwork::connected(std::string_view a, std::string_view b) const
{
    auto ia = index_of(a), ib = index_of(b);
    return ia && ib && edge_keys_.count(edge_key(static_cast<std::uint32_t>(*ia), static_cast<std::uint32_t>(*ib)));
}

bool FixtureNetwork::connect(std::string_view a, std::string_view b)
{
    auto ia = index_of(a), ib = index_of(b);
    if (!ia)
        throw FixtureError(FixtureError::Kind::UnknownProfile, std::string(a));
    if (!ib)
        throw FixtureError(FixtureError::Kind::UnknownProfile, std::string(b));
    return connect_index(static_cast<std::uint32_t>(*ia), static_cast<std::uint32_t>(*ib));
}

bool FixtureNetwork::connect_index(std::uint32_t a, std::uint32_t b)
{
    if (a == b || !edge_keys_.insert(edge_key(a, b)).second)
        return false;
    edges_.emplace_back(std::min(a, b), std::max(a, b));
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
    return true;
}

std::size_t FixtureNetwork::add_profile(FixtureProfile profile)
{
    if (profile.profile_id.empty() || index_.count(profile.profile_id))
        throw FixtureError(FixtureError::Kind::BadParameter, "duplicate or empty profile id " + profile.profile_id);
    auto idx = static_cast<std::uint32_t>(nodes_.size());
    index_.emplace(profile.profile_id, idx);
    if (!profile.login_name.empty())
        logins_.emplace(profile.login_name, idx);
    nodes_.push_back(std::move(profile));
    adjacency_.emplace_back();
    return idx;
}

const FixtureProfile* FixtureNetwork::find_login(std::string_view login, std::string_view secret) const
{
    auto it = logins_.find(std::string(login));
    if (it == logins_.end() || nodes_[it->second].secret != secret)
        return nullptr;
    return &nodes_[it->second];
}

FixtureNetwork generate_network(const GeneratorParams& params)
{
    using K = FixtureError::Kind;
    if (params.n_profiles < 1)
        throw FixtureError(K::BadParameter, "n_profiles must be >= 1");
    if (params.n_profiles > UINT32_MAX / 2)
        throw FixtureError(K::BadParameter, "n_profiles too large");
    if (!(params.mean_degree > 0.0) || !std::isfinite(params.mean_degree))
        throw FixtureError(K::BadParameter, "mean_degree must be positive");
    if (!(params.disclosure_rate >= 0.0 && params.disclosure_rate <= 1.0))
        throw FixtureError(K::BadParameter, "disclosure_rate must lie in [0,1]");
    if (params.posts_min < 0 || params.posts_max < params.posts_min)
        throw FixtureError(K::BadParameter, "posts_per_profile_range must satisfy 0 <= min <= max");
    std::vector<std::uint64_t> city_weights;
    for (const auto& [city, w] : params.city_weights) {
        if (!(w >= 0.0) || !std::isfinite(w) || city.empty())
            throw FixtureError(K::BadParameter, "city weights must be non-negative");
        city_weights.push_back(static_cast<std::uint64_t>(std::llround(w * 1e6)));
    }
    if (std::accumulate(city_weights.begin(), city_weights.end(), std::uint64_t{0}) == 0)
        throw FixtureError(K::BadParameter, "city weights must not all be zero");

    FixtureNetwork net;
    net.rng_seed_ = params.rng_seed;
    net.params_ = params;
    const auto n = static_cast<std::uint32_t>(params.n_profiles);

    Rng rng(params.rng_seed);
    for (std::uint32_t i = 0; i < n; ++i) {
        FixtureProfile p;
        p.profile_id = "u" + std::to_string(i);
        net.add_profile(std::move(p));
    }

    // G(n, m) with m fixed by the requested mean degree.
    const std::uint64_t max_edges = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    auto target = static_cast<std::uint64_t>(std::llround(params.mean_degree * n / 2.0));
    target = std::min(target, max_edges);
    if (target * 2 <= max_edges) {
        while (net.edges_.size() < target) {
            auto a = static_cast<std::uint32_t>(rng.below(n));
            auto b = static_cast<std::uint32_t>(rng.below(n));
            net.connect_index(a, b);
        }
    } else {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
        pairs.reserve(max_edges);
        for (std::uint32_t a = 0; a < n; ++a)
            for (std::uint32_t b = a + 1; b < n; ++b)
                pairs.emplace_back(a, b);
        for (std::uint64_t i = 0; i < target; ++i) {
            std::swap(pairs[i], pairs[i + rng.below(pairs.size() - i)]);
            net.connect_index(pairs[i].first, pairs[i].second);
        }
    }

    using namespace std::chrono;
    const sys_days newest = year{2019} / June / 30;
    for (std::uint32_t i = 0; i < n; ++i) {
        auto& p = net.nodes_[i];
        const auto& first = rng.pick(kFirstNames);
        const auto& last = rng.pick(kLastNames);
        p.display_name = first + " " + last;
        p.login_name = p.profile_id + "@fixture.test";
        p.secret = fmt::format("{:016x}", rng.next());
        p.gender = static_cast<Gender>(rng.weighted({48, 48, 4}));
        p.birthday = Date{sys_days{year{1970} / January / 1} + days{rng.between(0, 365 * 32)}};
        p.email = to_lower(first) + "." + to_lower(last) + std::to_string(i) + "@example.com";
        p.phone = fmt::format("+91 9{:09}", rng.below(1'000'000'000));
        p.relationship_status = static_cast<Relationship>(rng.weighted({40, 20, 8, 28, 4}));
        p.hometown = rng.pick(kHometowns);
        const auto& city = params.city_weights[rng.weighted(city_weights)].first;
        p.current_city = city == "other" ? rng.pick(kOtherCities) : city;
        auto n_family = static_cast<std::size_t>(rng.between(0, 3));
        for (std::size_t k = 0; k < n_family && n > 1; ++k) {
            auto other = static_cast<std::uint32_t>(rng.below(n));
            const auto& id = net.nodes_[other].profile_id;
            if (other != i && std::find(p.family_members.begin(), p.family_members.end(), id) == p.family_members.end())
                p.family_members.push_back(id);
        }
        p.pages_liked = sample_distinct(rng, kPages, static_cast<std::size_t>(rng.between(0, 8)));
        p.groups_joined = sample_distinct(rng, kGroups, static_cast<std::size_t>(rng.between(0, 5)));
        for (auto a : kAttributes)
            p.disclosed.set(a, rng.bernoulli(params.disclosure_rate));

        auto n_posts = rng.between(params.posts_min, params.posts_max);
        sys_days day = newest - days{rng.between(0, 30)};
        int minute = static_cast<int>(rng.between(0, 24 * 60 - 1));
        for (std::int64_t k = 0; k < n_posts; ++k) {
            auto post = make_post(rng, first, net.adjacency_[i], net.nodes_);
            post.date = Date{day};
            post.minute_of_day = minute;
            p.posts.push_back(std::move(post));
            // Step back in time for the next (older) post.
            auto back = rng.between(30, 5 * 24 * 60);
            int total = minute - static_cast<int>(back % (24 * 60));
            day -= days{back / (24 * 60)};
            if (total < 0) {
                total += 24 * 60;
                day -= days{1};
            }
            minute = total;
        }
        net.logins_.emplace(p.login_name, i);
    }
    return net;
}

nlohmann::json profile_to_json(const FixtureProfile& p, const std::vector<std::string>& friends)
{
    nlohmann::json disclosed = nlohmann::json::object();
    for (auto a : kAttributes)
        disclosed[std::string(attribute_name(a))] = p.discloses(a);
    nlohmann::json posts = nlohmann::json::array();
    for (const auto& post : p.posts) {
        nlohmann::json jp = {
            {"post_type", to_string(post.type)},
            {"title", post.title},
            {"content", post.content},
            {"date", iso_date(post.date)},
            {"time", clock_time(post.minute_of_day)},
            {"comment_count", post.comment_count},
            {"reactions", post.reactions},
            {"reaction_total", post.reaction_total()},
            {"share_count", post.share_count},
            {"view_count", post.view_count ? nlohmann::json(*post.view_count) : nlohmann::json(nullptr)},
            {"tags", post.tags},
        };
        posts.push_back(std::move(jp));
    }
    return {
        {"profile_id", p.profile_id},
        {"display_name", p.display_name},
        {"login_name", p.login_name},
        {"secret", p.secret},
        {"gender", to_string(p.gender)},
        {"birthday", iso_date(p.birthday)},
        {"email", p.email},
        {"phone", p.phone},
        {"relationship_status", to_string(p.relationship_status)},
        {"hometown", p.hometown},
        {"current_city", p.current_city},
        {"family_members", p.family_members},
        {"pages_liked", p.pages_liked},
        {"groups_joined", p.groups_joined},
        {"disclosed", disclosed},
        {"friends", friends},
        {"posts", posts},
    };
}

namespace {

Date parse_iso_date(const std::string& s)
{
    auto parts = split(s, '-');
    if (parts.size() != 3)
        throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad date " + s);
    auto y = parse_int(parts[0]), m = parse_int(parts[1]), d = parse_int(parts[2]);
    if (!y || !m || !d)
        throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad date " + s);
    Date date{std::chrono::year{static_cast<int>(*y)}, std::chrono::month{static_cast<unsigned>(*m)},
              std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok())
        throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad date " + s);
    return date;
}

int parse_clock(const std::string& s)
{
    auto parts = split(s, ':');
    auto h = parts.size() == 2 ? parse_int(parts[0]) : std::nullopt;
    auto m = parts.size() == 2 ? parse_int(parts[1]) : std::nullopt;
    if (!h || !m)
        throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad time " + s);
    return static_cast<int>(*h * 60 + *m);
}

} // namespace

FixtureProfile profile_from_json(const nlohmann::json& j)
{
    FixtureProfile p;
    p.profile_id = j.at("profile_id").get<std::string>();
    p.display_name = j.at("display_name").get<std::string>();
    p.login_name = j.at("login_name").get<std::string>();
    p.secret = j.at("secret").get<std::string>();
    auto g = gender_from_string(j.at("gender").get<std::string>());
    auto r = relationship_from_string(j.at("relationship_status").get<std::string>());
    if (!g || !r)
        throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad enum in profile " + p.profile_id);
    p.gender = *g;
    p.relationship_status = *r;
    p.birthday = parse_iso_date(j.at("birthday").get<std::string>());
    p.email = j.at("email").get<std::string>();
    p.phone = j.at("phone").get<std::string>();
    p.hometown = j.at("hometown").get<std::string>();
    p.current_city = j.at("current_city").get<std::string>();
    p.family_members = j.at("family_members").get<std::vector<std::string>>();
    p.pages_liked = j.at("pages_liked").get<std::vector<std::string>>();
    p.groups_joined = j.at("groups_joined").get<std::vector<std::string>>();
    for (auto a : kAttributes)
        p.disclosed.set(a, j.at("disclosed").at(std::string(attribute_name(a))).get<bool>());
    for (const auto& jp : j.at("posts")) {
        FixturePost post;
        auto t = post_type_from_string(jp.at("post_type").get<std::string>());
        if (!t)
            throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad post type in " + p.profile_id);
        post.type = *t;
        post.title = jp.at("title").get<std::string>();
        post.content = jp.at("content").get<std::string>();
        post.date = parse_iso_date(jp.at("date").get<std::string>());
        post.minute_of_day = parse_clock(jp.at("time").get<std::string>());
        post.comment_count = jp.at("comment_count").get<std::int64_t>();
        post.reactions = jp.at("reactions").get<std::map<std::string, std::int64_t>>();
        post.share_count = jp.at("share_count").get<std::int64_t>();
        if (!jp.at("view_count").is_null())
            post.view_count = jp.at("view_count").get<std::int64_t>();
        post.tags = jp.at("tags").get<std::vector<std::string>>();
        p.posts.push_back(std::move(post));
    }
    return p;
}

nlohmann::json FixtureNetwork::to_json() const
{
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& [city, w] : params_.city_weights)
        weights.push_back({city, w});
    nlohmann::json profiles = nlohmann::json::array();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto jp = profile_to_json(nodes_[i], {});
        jp.erase("friends");
        profiles.push_back(std::move(jp));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : edges_)
        edges.push_back({a, b});
    return {
        {"format", "imcrawler-fixture-network/1"},
        {"rng_seed", rng_seed_},
        {"params",
         {{"n_profiles", params_.n_profiles},
          {"mean_degree", params_.mean_degree},
          {"city_weights", weights},
          {"disclosure_rate", params_.disclosure_rate},
          {"posts_min", params_.posts_min},
          {"posts_max", params_.posts_max}}},
        {"profiles", profiles},
        {"edges", edges},
    };
}

FixtureNetwork FixtureNetwork::from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format") != "imcrawler-fixture-network/1")
            throw FixtureError(FixtureError::Kind::BadNetworkFile, "unknown format");
        FixtureNetwork net;
        net.rng_seed_ = j.at("rng_seed").get<std::uint64_t>();
        const auto& jp = j.at("params");
        net.params_.n_profiles = jp.at("n_profiles").get<std::size_t>();
        net.params_.mean_degree = jp.at("mean_degree").get<double>();
        net.params_.city_weights.clear();
        for (const auto& w : jp.at("city_weights"))
            net.params_.city_weights.emplace_back(w.at(0).get<std::string>(), w.at(1).get<double>());
        net.params_.disclosure_rate = jp.at("disclosure_rate").get<double>();
        net.params_.posts_min = jp.at("posts_min").get<std::int64_t>();
        net.params_.posts_max = jp.at("posts_max").get<std::int64_t>();
        net.params_.rng_seed = net.rng_seed_;
        for (const auto& p : j.at("profiles"))
            net.add_profile(profile_from_json(p));
        for (const auto& e : j.at("edges")) {
            auto a = e.at(0).get<std::uint32_t>(), b = e.at(1).get<std::uint32_t>();
            if (a >= net.size() || b >= net.size() || !net.connect_index(a, b))
                throw FixtureError(FixtureError::Kind::BadNetworkFile, "bad edge");
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw FixtureError(FixtureError::Kind::BadNetworkFile, e.what());
    }
}

std::vector<std::uint8_t> serialize(const FixtureNetwork& network)
{
    return nlohmann::json::to_cbor(network.to_json());
}

FixtureNetwork deserialize(const std::vector<std::uint8_t>& bytes)
{
    try {
        return FixtureNetwork::from_json(nlohmann::json::from_cbor(bytes));
    } catch (const nlohmann::json::exception& e) {
        throw FixtureError(FixtureError::Kind::BadNetworkFile, e.what());
    }
}

void save_network(const std::filesystem::path& path, const FixtureNetwork& network)
{
    auto bytes = serialize(network);
    write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

FixtureNetwork load_network(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FixtureError(FixtureError::Kind::BadNetworkFile, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

} // namespace imcrawler::fixture
