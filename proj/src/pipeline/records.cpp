#include "imcrawler/pipeline/records.hpp"

#include <array>
#include <chrono>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "imcrawler/csv.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler::pipeline {

namespace {

constexpr std::string_view kNotDisclosedCell = "NOT_DISCLOSED";
constexpr std::string_view kNotPresentCell = "NOT_PRESENT";
constexpr std::string_view kMissingCell = "MISSING";
constexpr std::string_view kUnparseablePrefix = "UNPARSEABLE:";

constexpr std::array<std::string_view, 12> kMonths = {"january", "february", "march",     "april",   "may",      "june",
                                                      "july",    "august",   "september", "october", "november", "december"};

template <class T>
std::optional<std::string> encode_state(const Field<T>& f)
{
    switch (f.state) {
    case FieldState::Value: return std::nullopt;
    case FieldState::NotDisclosed: return std::string(kNotDisclosedCell);
    case FieldState::NotPresent: return std::string(kNotPresentCell);
    case FieldState::Missing: return std::string(kMissingCell);
    case FieldState::Unparseable: return std::string(kUnparseablePrefix) + f.raw;
    }
    return std::string(kMissingCell);
}

template <class T, class Parse>
Field<T> decode_cell(std::string_view cell, Parse parse)
{
    if (cell == kNotDisclosedCell)
        return Field<T>::marked(FieldState::NotDisclosed);
    if (cell == kNotPresentCell)
        return Field<T>::marked(FieldState::NotPresent);
    if (cell == kMissingCell)
        return Field<T>::marked(FieldState::Missing);
    if (cell.substr(0, kUnparseablePrefix.size()) == kUnparseablePrefix)
        return Field<T>::marked(FieldState::Unparseable, std::string(cell.substr(kUnparseablePrefix.size())));
    if (auto v = parse(cell))
        return Field<T>::of(std::move(*v));
    return Field<T>::marked(FieldState::Unparseable, std::string(cell));
}

std::size_t parse_index(const std::string& s, const char* what)
{
    auto v = parse_int(s);
    if (!v || *v < 0)
        throw Error(ErrorCategory::Parse, "BadStructuredRow", fmt::format("bad {}: '{}'", what, s));
    return static_cast<std::size_t>(*v);
}

std::vector<std::string> without_columns(std::vector<std::string> row, const std::vector<std::string>& columns)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < row.size(); ++i)
        if (columns[i] != "seed_index" && columns[i] != "captured_at")
            out.push_back(std::move(row[i]));
    return out;
}

void check_header(const csv::Row& header, const std::vector<std::string>& expected, const fs::path& path)
{
    if (header != expected)
        throw Error(ErrorCategory::Parse, "BadStructuredHeader", "unexpected header in " + path.string());
}

} // namespace

std::optional<std::int64_t> parse_count(std::string_view text)
{
    auto s = trim(text);
    if (s.empty())
        return std::nullopt;
    std::int64_t mult = 1;
    char last = s.back();
    if (last == 'K' || last == 'k') {
        mult = 1000;
        s.remove_suffix(1);
    } else if (last == 'M' || last == 'm') {
        mult = 1'000'000;
        s.remove_suffix(1);
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    std::int64_t scale = 1;
    std::size_t digits = 0;
    std::size_t i = 0;
    bool seen_digit = false;
    for (; i < s.size() && s[i] != '.'; ++i) {
        char c = s[i];
        if (c == ',') {
            if (!seen_digit)
                return std::nullopt;
            continue;
        }
        if (c < '0' || c > '9' || ++digits > 15)
            return std::nullopt;
        seen_digit = true;
        whole = whole * 10 + (c - '0');
    }
    if (!seen_digit)
        return std::nullopt;
    if (i < s.size()) {
        if (mult == 1 || i + 1 == s.size())
            return std::nullopt;
        for (++i; i < s.size(); ++i) {
            char c = s[i];
            if (c < '0' || c > '9' || ++digits > 15)
                return std::nullopt;
            frac = frac * 10 + (c - '0');
            scale *= 10;
        }
    }
    // (whole + frac/scale) * mult, rounded half up.
    auto numerator = (whole * scale + frac) * mult;
    return (numerator * 2 + scale) / (scale * 2);
}

std::optional<std::string> parse_date(std::string_view text)
{
    using namespace std::chrono;
    auto s = collapse_whitespace(text);
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto parts = split(s, ' ');
    if (parts.size() == 3) {
        auto day = parse_int(parts[0]);
        auto year = parse_int(parts[2]);
        auto name = to_lower(parts[1]);
        for (std::size_t k = 0; k < kMonths.size(); ++k)
            if (kMonths[k] == name)
                m = static_cast<unsigned>(k + 1);
        if (!day || !year || m == 0 || *day < 1 || *day > 31)
            return std::nullopt;
        d = static_cast<unsigned>(*day);
        y = static_cast<int>(*year);
    } else {
        auto iso = split(s, '-');
        if (iso.size() != 3 || iso[0].size() != 4 || iso[1].size() != 2 || iso[2].size() != 2)
            return std::nullopt;
        auto year = parse_int(iso[0]);
        auto month = parse_int(iso[1]);
        auto day = parse_int(iso[2]);
        if (!year || !month || !day || *month < 1 || *month > 12 || *day < 1 || *day > 31)
            return std::nullopt;
        y = static_cast<int>(*year);
        m = static_cast<unsigned>(*month);
        d = static_cast<unsigned>(*day);
    }
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok() || y < 1000 || y > 9999)
        return std::nullopt;
    return fmt::format("{:04}-{:02}-{:02}", y, m, d);
}

std::optional<std::string> parse_clock(std::string_view text)
{
    auto parts = split(trim(text), ':');
    if (parts.size() != 2 || parts[0].empty() || parts[0].size() > 2 || parts[1].size() != 2)
        return std::nullopt;
    auto h = parse_int(parts[0]);
    auto m = parse_int(parts[1]);
    if (!h || !m || *h < 0 || *h > 23 || *m < 0 || *m > 59 || parts[0][0] == '+' || parts[1][0] == '+')
        return std::nullopt;
    return fmt::format("{:02}:{:02}", *h, *m);
}

std::string encode(const IntField& f)
{
    return encode_state(f).value_or(std::to_string(f.value));
}

std::string encode(const TextField& f)
{
    return encode_state(f).value_or(f.value);
}

std::string encode(const ListField& f)
{
    if (auto s = encode_state(f))
        return *s;
    return nlohmann::json(f.value).dump();
}

std::string encode(const CountMapField& f)
{
    if (auto s = encode_state(f))
        return *s;
    return nlohmann::json(f.value).dump();
}

IntField decode_int(std::string_view cell)
{
    return decode_cell<std::int64_t>(cell, [](std::string_view c) { return parse_int(c); });
}

TextField decode_text(std::string_view cell)
{
    return decode_cell<std::string>(cell, [](std::string_view c) { return std::optional<std::string>(c); });
}

ListField decode_list(std::string_view cell)
{
    return decode_cell<std::vector<std::string>>(cell, [](std::string_view c) -> std::optional<std::vector<std::string>> {
        try {
            auto j = nlohmann::json::parse(c);
            if (!j.is_array())
                return std::nullopt;
            return j.get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;
        }
    });
}

CountMapField decode_count_map(std::string_view cell)
{
    using Map = std::map<std::string, std::int64_t>;
    return decode_cell<Map>(cell, [](std::string_view c) -> std::optional<Map> {
        try {
            auto j = nlohmann::json::parse(c);
            if (!j.is_object())
                return std::nullopt;
            return j.get<Map>();
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;
        }
    });
}

const std::vector<std::string>& profile_columns()
{
    static const std::vector<std::string> cols = {
        "profile_id",    "profile_url",         "seed_index", "captured_at",   "page_profile_id",
        "friend_count",  "gender",              "birthday",   "email",         "phone",
        "relationship_status", "hometown",      "current_city", "family_members", "pages_liked",
        "groups_joined", "page_complete",
    };
    return cols;
}

const std::vector<std::string>& post_columns()
{
    static const std::vector<std::string> cols = {
        "profile_id", "profile_url",   "post_index",     "seed_index",  "captured_at", "post_type",
        "title",      "content",       "date",           "time",        "comment_count", "emotion_counts",
        "share_count", "view_count",   "reaction_total", "tags",
    };
    return cols;
}

std::vector<std::string> to_row(const ProfileRecord& r)
{
    return {r.profile_id,
            r.profile_url,
            std::to_string(r.seed_index),
            r.captured_at,
            encode(r.page_profile_id),
            encode(r.friend_count),
            encode(r.gender),
            encode(r.birthday),
            encode(r.email),
            encode(r.phone),
            encode(r.relationship_status),
            encode(r.hometown),
            encode(r.current_city),
            encode(r.family_members),
            encode(r.pages_liked),
            encode(r.groups_joined),
            r.page_complete ? "1" : "0"};
}

std::vector<std::string> to_row(const PostRecord& r)
{
    return {r.profile_id,
            r.profile_url,
            std::to_string(r.post_index),
            std::to_string(r.seed_index),
            r.captured_at,
            encode(r.post_type),
            encode(r.title),
            encode(r.content),
            encode(r.date),
            encode(r.time),
            encode(r.comment_count),
            encode(r.emotion_counts),
            encode(r.share_count),
            encode(r.view_count),
            encode(r.reaction_total),
            encode(r.tags)};
}

ProfileRecord profile_from_row(const std::vector<std::string>& row)
{
    if (row.size() != profile_columns().size())
        throw Error(ErrorCategory::Parse, "BadStructuredRow",
                    fmt::format("profile row has {} fields, expected {}", row.size(), profile_columns().size()));
    ProfileRecord r;
    r.profile_id = row[0];
    r.profile_url = row[1];
    r.seed_index = parse_index(row[2], "seed_index");
    r.captured_at = row[3];
    r.page_profile_id = decode_text(row[4]);
    r.friend_count = decode_int(row[5]);
    r.gender = decode_text(row[6]);
    r.birthday = decode_text(row[7]);
    r.email = decode_text(row[8]);
    r.phone = decode_text(row[9]);
    r.relationship_status = decode_text(row[10]);
    r.hometown = decode_text(row[11]);
    r.current_city = decode_text(row[12]);
    r.family_members = decode_list(row[13]);
    r.pages_liked = decode_list(row[14]);
    r.groups_joined = decode_list(row[15]);
    r.page_complete = row[16] == "1";
    return r;
}

PostRecord post_from_row(const std::vector<std::string>& row)
{
    if (row.size() != post_columns().size())
        throw Error(ErrorCategory::Parse, "BadStructuredRow",
                    fmt::format("post row has {} fields, expected {}", row.size(), post_columns().size()));
    PostRecord r;
    r.profile_id = row[0];
    r.profile_url = row[1];
    r.post_index = parse_index(row[2], "post_index");
    r.seed_index = parse_index(row[3], "seed_index");
    r.captured_at = row[4];
    r.post_type = decode_text(row[5]);
    r.title = decode_text(row[6]);
    r.content = decode_text(row[7]);
    r.date = decode_text(row[8]);
    r.time = decode_text(row[9]);
    r.comment_count = decode_int(row[10]);
    r.emotion_counts = decode_count_map(row[11]);
    r.share_count = decode_int(row[12]);
    r.view_count = decode_int(row[13]);
    r.reaction_total = decode_int(row[14]);
    r.tags = decode_list(row[15]);
    return r;
}

std::string content_key(const ProfileRecord& r)
{
    return csv::format_row(without_columns(to_row(r), profile_columns()));
}

std::string content_key(const PostRecord& r)
{
    return csv::format_row(without_columns(to_row(r), post_columns()));
}

void write_structured(const fs::path& dir, const Structured& data)
{
    fs::create_directories(dir);
    std::vector<csv::Row> profiles = {profile_columns()};
    for (const auto& p : data.profiles)
        profiles.push_back(to_row(p));
    std::vector<csv::Row> posts = {post_columns()};
    for (const auto& p : data.posts)
        posts.push_back(to_row(p));
    std::vector<csv::Row> skipped = {{"line_no", "reason", "raw"}};
    for (const auto& s : data.skipped)
        skipped.push_back({std::to_string(s.line_no), s.reason, s.raw});
    csv::write_file(dir / "profiles.csv", profiles);
    csv::write_file(dir / "posts.csv", posts);
    csv::write_file(dir / "skipped.csv", skipped);
}

Structured read_structured(const fs::path& dir)
{
    Structured out;
    auto profiles = csv::read_file(dir / "profiles.csv");
    if (profiles.empty())
        throw Error(ErrorCategory::Parse, "BadStructuredHeader", "empty profiles.csv in " + dir.string());
    check_header(profiles.front(), profile_columns(), dir / "profiles.csv");
    for (std::size_t i = 1; i < profiles.size(); ++i)
        out.profiles.push_back(profile_from_row(profiles[i]));

    auto posts = csv::read_file(dir / "posts.csv");
    if (posts.empty())
        throw Error(ErrorCategory::Parse, "BadStructuredHeader", "empty posts.csv in " + dir.string());
    check_header(posts.front(), post_columns(), dir / "posts.csv");
    for (std::size_t i = 1; i < posts.size(); ++i)
        out.posts.push_back(post_from_row(posts[i]));

    if (fs::exists(dir / "skipped.csv")) {
        auto skipped = csv::read_file(dir / "skipped.csv");
        for (std::size_t i = 1; i < skipped.size(); ++i) {
            if (skipped[i].size() != 3)
                continue;
            out.skipped.push_back({parse_index(skipped[i][0], "line_no"), skipped[i][1], skipped[i][2]});
        }
    }
    return out;
}

} // namespace imcrawler::pipeline
