#pragma once

// Deterministic synthetic social network used as the crawl target.

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "imcrawler/error.hpp"

namespace imcrawler::fixture {

class FixtureError : public Error {
public:
    enum class Kind { BadParameter, UnknownProfile, BadNetworkFile, BindFailure };
    FixtureError(Kind kind, const std::string& detail);
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

enum class Gender { Male, Female, Unspecified };
enum class Relationship { Single, InARelationship, Engaged, Married, Complicated };
enum class PostType { Text, Photo, Video, Link };

std::string_view to_string(Gender g);
std::string_view to_string(Relationship r);
std::string_view to_string(PostType t);
std::optional<Gender> gender_from_string(std::string_view s);
std::optional<Relationship> relationship_from_string(std::string_view s);
std::optional<PostType> post_type_from_string(std::string_view s);

inline constexpr std::array<std::string_view, 6> kReactionKinds = {"like", "love", "haha", "wow", "sad", "angry"};

// Attributes subject to the per-profile disclosure mask. Friend count is
// always public; the friend list is what the crawler traverses.
enum class Attribute {
    Gender,
    Birthday,
    Email,
    Phone,
    RelationshipStatus,
    Hometown,
    CurrentCity,
    FamilyMembers,
    PagesLiked,
    GroupsJoined,
};
inline constexpr std::size_t kAttributeCount = 10;
inline constexpr std::array<Attribute, kAttributeCount> kAttributes = {
    Attribute::Gender,      Attribute::Birthday,      Attribute::Email,      Attribute::Phone,
    Attribute::RelationshipStatus, Attribute::Hometown, Attribute::CurrentCity, Attribute::FamilyMembers,
    Attribute::PagesLiked,  Attribute::GroupsJoined};
std::string_view attribute_name(Attribute a);

struct DisclosureMask {
    std::array<bool, kAttributeCount> bits{};

    bool operator[](Attribute a) const { return bits[static_cast<std::size_t>(a)]; }
    void set(Attribute a, bool v) { bits[static_cast<std::size_t>(a)] = v; }
    static DisclosureMask all() { DisclosureMask m; m.bits.fill(true); return m; }
    bool operator==(const DisclosureMask&) const = default;
};

using Date = std::chrono::year_month_day;
std::string iso_date(const Date& d);          // 2019-03-04
std::string human_date(const Date& d);        // 4 March 2019
std::string clock_time(int minute_of_day);    // 09:05

struct FixturePost {
    PostType type = PostType::Text;
    std::string title;
    std::string content;
    Date date{};
    int minute_of_day = 0;
    std::int64_t comment_count = 0;
    std::map<std::string, std::int64_t> reactions;  // every kind in kReactionKinds
    std::int64_t share_count = 0;
    std::optional<std::int64_t> view_count;         // videos only
    std::vector<std::string> tags;                  // profile ids

    std::int64_t reaction_total() const;
    bool operator==(const FixturePost&) const = default;
};

struct FixtureProfile {
    std::string profile_id;
    std::string display_name;
    std::string login_name;
    std::string secret;

    Gender gender = Gender::Unspecified;
    Date birthday{};
    std::string email;
    std::string phone;
    Relationship relationship_status = Relationship::Single;
    std::string hometown;
    std::string current_city;
    std::vector<std::string> family_members;
    std::vector<std::string> pages_liked;
    std::vector<std::string> groups_joined;
    std::vector<FixturePost> posts;  // newest first
    DisclosureMask disclosed;

    bool discloses(Attribute a) const { return disclosed[a]; }
    bool operator==(const FixtureProfile&) const = default;
};

struct GeneratorParams {
    std::size_t n_profiles = 200;
    double mean_degree = 10.0;
    // Keys are city names; the key "other" draws from a pool of non-metro cities.
    std::vector<std::pair<std::string, double>> city_weights = default_city_weights();
    double disclosure_rate = 0.6;
    std::int64_t posts_min = 0;
    std::int64_t posts_max = 12;
    std::uint64_t rng_seed = 1;

    static std::vector<std::pair<std::string, double>> default_city_weights();
};

class FixtureNetwork {
public:
    FixtureNetwork() = default;

    std::uint64_t rng_seed() const noexcept { return rng_seed_; }
    const GeneratorParams& params() const noexcept { return params_; }

    std::size_t size() const noexcept { return nodes_.size(); }
    const std::vector<FixtureProfile>& nodes() const noexcept { return nodes_; }
    const FixtureProfile& profile(std::size_t index) const { return nodes_.at(index); }
    const FixtureProfile& profile(std::string_view id) const;
    FixtureProfile& mutable_profile(std::string_view id);
    std::optional<std::size_t> index_of(std::string_view id) const;
    bool contains(std::string_view id) const { return index_of(id).has_value(); }

    // Undirected edges as (lower index, higher index) in creation order.
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges() const noexcept { return edges_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    // Friend ids of `id` in friend-list order.
    std::vector<std::string> friends_of(std::string_view id) const;
    const std::vector<std::uint32_t>& neighbors(std::size_t index) const { return adjacency_.at(index); }
    bool connected(std::string_view a, std::string_view b) const;

    // Adds the friendship if absent. Returns false for self-loops and
    // existing edges.
    bool connect(std::string_view a, std::string_view b);
    std::size_t add_profile(FixtureProfile profile);

    const FixtureProfile* find_login(std::string_view login, std::string_view secret) const;

    nlohmann::json to_json() const;
    static FixtureNetwork from_json(const nlohmann::json& j);

    bool operator==(const FixtureNetwork& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

private:
    friend FixtureNetwork generate_network(const GeneratorParams&);

    bool connect_index(std::uint32_t a, std::uint32_t b);

    std::uint64_t rng_seed_ = 0;
    GeneratorParams params_;
    std::vector<FixtureProfile> nodes_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::unordered_set<std::uint64_t> edge_keys_;
    std::unordered_map<std::string, std::uint32_t> logins_;
};

FixtureNetwork generate_network(const GeneratorParams& params);

// CBOR encoding of to_json(); byte-stable for a fixed network.
std::vector<std::uint8_t> serialize(const FixtureNetwork& network);
FixtureNetwork deserialize(const std::vector<std::uint8_t>& bytes);
void save_network(const std::filesystem::path& path, const FixtureNetwork& network);
FixtureNetwork load_network(const std::filesystem::path& path);

nlohmann::json profile_to_json(const FixtureProfile& p, const std::vector<std::string>& friends);
FixtureProfile profile_from_json(const nlohmann::json& j);

} // namespace imcrawler::fixture
