#pragma once

// Structured profile and post records plus their CSV form.
//
// Every field carries a state next to its value. In CSV cells the states
// are written as NOT_DISCLOSED, NOT_PRESENT, MISSING and UNPARSEABLE:<raw>;
// a value is written as itself (lists as JSON arrays, maps as JSON objects).

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imcrawler/error.hpp"

namespace imcrawler::pipeline {

namespace fs = std::filesystem;

enum class FieldState { Value, NotDisclosed, NotPresent, Missing, Unparseable };

template <class T>
struct Field {
    FieldState state = FieldState::Missing;
    T value{};
    std::string raw;  // offending text when Unparseable

    static Field of(T v) { return Field{FieldState::Value, std::move(v), {}}; }
    static Field marked(FieldState s, std::string raw = {}) { return Field{s, T{}, std::move(raw)}; }

    bool has_value() const noexcept { return state == FieldState::Value; }
    bool operator==(const Field&) const = default;
};

using IntField = Field<std::int64_t>;
using TextField = Field<std::string>;
using ListField = Field<std::vector<std::string>>;
using CountMapField = Field<std::map<std::string, std::int64_t>>;

struct ProfileRecord {
    std::string profile_id;  // from the normalized profile URL
    std::string profile_url;
    std::size_t seed_index = 0;
    std::string captured_at;
    TextField page_profile_id;  // id printed on the page itself
    IntField friend_count;
    TextField gender;               // male | female | unspecified
    TextField birthday;             // YYYY-MM-DD
    TextField email;
    TextField phone;
    TextField relationship_status;  // single | in_a_relationship | engaged | married | its_complicated
    TextField hometown;
    TextField current_city;
    ListField family_members;
    ListField pages_liked;
    ListField groups_joined;
    bool page_complete = false;

    bool operator==(const ProfileRecord&) const = default;
};

inline const std::vector<std::string> kPostTypes = {"text", "photo", "video", "link"};

struct PostRecord {
    std::string profile_id;
    std::string profile_url;
    std::size_t post_index = 0;
    std::size_t seed_index = 0;
    std::string captured_at;
    TextField post_type;
    TextField title;
    TextField content;
    TextField date;  // YYYY-MM-DD
    TextField time;  // HH:MM
    IntField comment_count;
    CountMapField emotion_counts;
    IntField share_count;
    IntField view_count;
    IntField reaction_total;
    ListField tags;

    bool operator==(const PostRecord&) const = default;
};

// Raw row that could not be turned into a record.
struct SkippedRow {
    std::size_t line_no = 0;
    std::string reason;
    std::string raw;

    bool operator==(const SkippedRow&) const = default;
};

struct Structured {
    std::vector<ProfileRecord> profiles;
    std::vector<PostRecord> posts;
    std::vector<SkippedRow> skipped;
    std::uint64_t raw_rows = 0;       // data rows read from the raw file
    std::uint64_t consumed_rows = 0;  // rows that went into a record
};

// "1,234", "1.2K", "15K", "1.5M"; K = 1000, M = 1,000,000, rounded half up.
std::optional<std::int64_t> parse_count(std::string_view text);
// "4 March 2019" or "2019-03-04" -> "2019-03-04".
std::optional<std::string> parse_date(std::string_view text);
// "9:05" or "09:05" -> "09:05".
std::optional<std::string> parse_clock(std::string_view text);

// Cell codec.
std::string encode(const IntField& f);
std::string encode(const TextField& f);
std::string encode(const ListField& f);
std::string encode(const CountMapField& f);
IntField decode_int(std::string_view cell);
TextField decode_text(std::string_view cell);
ListField decode_list(std::string_view cell);
CountMapField decode_count_map(std::string_view cell);

const std::vector<std::string>& profile_columns();
const std::vector<std::string>& post_columns();

std::vector<std::string> to_row(const ProfileRecord& r);
std::vector<std::string> to_row(const PostRecord& r);
ProfileRecord profile_from_row(const std::vector<std::string>& row);
PostRecord post_from_row(const std::vector<std::string>& row);

// Row text without seed_index and captured_at, for comparing runs.
std::string content_key(const ProfileRecord& r);
std::string content_key(const PostRecord& r);

// profiles.csv, posts.csv and skipped.csv inside dir.
void write_structured(const fs::path& dir, const Structured& data);
Structured read_structured(const fs::path& dir);

} // namespace imcrawler::pipeline
