#include "imcrawler/pipeline/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "imcrawler/crawl.hpp"
#include "imcrawler/csv.hpp"
#include "imcrawler/dom/html.hpp"
#include "imcrawler/extract.hpp"
#include "imcrawler/url.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler::pipeline {

namespace {

const std::set<std::string> kGenders = {"male", "female", "unspecified"};
const std::set<std::string> kRelationships = {"single", "in_a_relationship", "engaged", "married", "its_complicated"};

struct Builder {
    std::string url;
    std::size_t seed_index = 0;
    std::string captured_at;
    std::size_t post_index = 0;
    std::map<std::string, std::string> fields;
};

// Common handling of the marker values written by the extractor.
template <class T, class Parse>
Field<T> convert(const std::map<std::string, std::string>& fields, const std::string& name, Parse parse)
{
    auto it = fields.find(name);
    if (it == fields.end() || it->second == kMissing)
        return Field<T>::marked(FieldState::Missing);
    const auto& raw = it->second;
    if (raw == kNotDisclosed)
        return Field<T>::marked(FieldState::NotDisclosed);
    if (raw == kNotPresent)
        return Field<T>::marked(FieldState::NotPresent);
    if (auto v = parse(raw))
        return Field<T>::of(std::move(*v));
    return Field<T>::marked(FieldState::Unparseable, dom::strip_markup(raw));
}

std::optional<std::string> plain_text(const std::string& raw)
{
    return dom::strip_markup(raw);
}

std::optional<std::string> non_empty_text(const std::string& raw)
{
    auto s = dom::strip_markup(raw);
    if (s.empty())
        return std::nullopt;
    return s;
}

std::optional<std::int64_t> count_value(const std::string& raw)
{
    return parse_count(dom::strip_markup(raw));
}

// "12 comments" -> 12: one count followed only by words.
std::optional<std::int64_t> count_with_unit(const std::string& raw)
{
    auto parts = split(dom::strip_markup(raw), ' ');
    if (parts.empty())
        return std::nullopt;
    for (std::size_t i = 1; i < parts.size(); ++i)
        if (!std::all_of(parts[i].begin(), parts[i].end(), [](unsigned char c) { return std::isalpha(c); }))
            return std::nullopt;
    return parse_count(parts[0]);
}

std::optional<std::string> token_in(const std::string& raw, const std::set<std::string>& allowed)
{
    std::string token;
    for (char c : to_lower(dom::strip_markup(raw))) {
        if (c == '\'')
            continue;
        token += c == ' ' || c == '-' ? '_' : c;
    }
    if (!allowed.count(token))
        return std::nullopt;
    return token;
}

std::optional<std::vector<std::string>> raw_list(const std::string& raw)
{
    try {
        auto j = nlohmann::json::parse(raw);
        if (!j.is_array())
            return std::nullopt;
        std::vector<std::string> out;
        for (const auto& e : j) {
            if (!e.is_string())
                return std::nullopt;
            out.push_back(dom::strip_markup(e.get<std::string>()));
        }
        return out;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

// ["<span class="kind">like</span> <span class="n">3</span>", ...] -> {like: 3}
std::optional<std::map<std::string, std::int64_t>> emotion_map(const std::string& raw)
{
    auto items = raw_list(raw);
    if (!items)
        return std::nullopt;
    std::map<std::string, std::int64_t> out;
    for (const auto& item : *items) {
        auto parts = split(item, ' ');
        if (parts.size() != 2 || parts[0].empty())
            return std::nullopt;
        auto kind = to_lower(parts[0]);
        if (!std::all_of(kind.begin(), kind.end(), [](unsigned char c) { return std::isalpha(c); }))
            return std::nullopt;
        auto n = parse_count(parts[1]);
        if (!n || out.count(kind))
            return std::nullopt;
        out[kind] = *n;
    }
    return out;
}

ProfileRecord build_profile(const Builder& b)
{
    const auto& f = b.fields;
    ProfileRecord r;
    r.profile_url = b.url;
    r.profile_id = profile_id_from_url(b.url).value_or("");
    r.seed_index = b.seed_index;
    r.captured_at = b.captured_at;
    r.page_profile_id = convert<std::string>(f, "profile_id", non_empty_text);
    r.friend_count = convert<std::int64_t>(f, "friend_count", count_value);
    r.gender = convert<std::string>(f, "basic_information.gender",
                                    [](const std::string& s) { return token_in(s, kGenders); });
    r.birthday = convert<std::string>(f, "basic_information.birthday",
                                      [](const std::string& s) { return parse_date(dom::strip_markup(s)); });
    r.email = convert<std::string>(f, "basic_information.email", non_empty_text);
    r.phone = convert<std::string>(f, "basic_information.phone", non_empty_text);
    r.hometown = convert<std::string>(f, "places_lived.hometown", non_empty_text);
    r.current_city = convert<std::string>(f, "places_lived.current_city", non_empty_text);
    r.relationship_status = convert<std::string>(f, "family_and_relationship.relationship_status",
                                                 [](const std::string& s) { return token_in(s, kRelationships); });
    r.family_members = convert<std::vector<std::string>>(f, "family_and_relationship.family_members", raw_list);
    r.pages_liked = convert<std::vector<std::string>>(f, "pages_liked", raw_list);
    r.groups_joined = convert<std::vector<std::string>>(f, "groups_joined", raw_list);
    auto complete = f.find("page_complete");
    r.page_complete = complete != f.end() && trim(complete->second) == "1";
    return r;
}

PostRecord build_post(const Builder& b)
{
    const auto& f = b.fields;
    PostRecord r;
    r.profile_url = b.url;
    r.profile_id = profile_id_from_url(b.url).value_or("");
    r.post_index = b.post_index;
    r.seed_index = b.seed_index;
    r.captured_at = b.captured_at;
    r.post_type = convert<std::string>(f, "type", [](const std::string& s) -> std::optional<std::string> {
        auto t = to_lower(trim(s));
        if (std::find(kPostTypes.begin(), kPostTypes.end(), t) == kPostTypes.end())
            return std::nullopt;
        return t;
    });
    r.title = convert<std::string>(f, "title", plain_text);
    r.content = convert<std::string>(f, "content", plain_text);
    r.date = convert<std::string>(f, "date", [](const std::string& s) { return parse_date(dom::strip_markup(s)); });
    r.time = convert<std::string>(f, "time", [](const std::string& s) { return parse_clock(dom::strip_markup(s)); });
    r.comment_count = convert<std::int64_t>(f, "comments", count_with_unit);
    r.emotion_counts = convert<std::map<std::string, std::int64_t>>(f, "emotions", emotion_map);
    r.share_count = convert<std::int64_t>(f, "shares", count_with_unit);
    r.view_count = convert<std::int64_t>(f, "views", count_with_unit);
    r.reaction_total = convert<std::int64_t>(f, "reactions", count_value);
    r.tags = convert<std::vector<std::string>>(f, "tags", raw_list);
    return r;
}

bool known_profile_field(const std::string& name)
{
    const auto& names = profile_field_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool known_post_field(const std::string& name)
{
    const auto& names = post_field_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::string row_text(const csv::Row& row)
{
    auto s = csv::format_row(row);
    if (!s.empty() && s.back() == '\n')
        s.pop_back();
    return s;
}

class Normalizer {
public:
    explicit Normalizer(Structured& out) : out_(out) {}

    void row(const csv::Row& row, std::size_t line_no)
    {
        ++out_.raw_rows;
        auto skip = [&](std::string reason) { out_.skipped.push_back({line_no, std::move(reason), row_text(row)}); };
        if (row.size() != 6)
            return skip("expected 6 fields");
        const auto& kind = row[0];
        auto url = normalize_profile_url(row[1]);
        auto seed = parse_int(row[2]);
        const auto& field = row[3];
        if (!url || !profile_id_from_url(*url))
            return skip("bad profile_url");
        if (!seed || *seed < 0)
            return skip("bad seed_index");
        auto seed_index = static_cast<std::size_t>(*seed);

        if (kind == "profile") {
            if (!known_profile_field(field))
                return skip("unknown profile field '" + field + "'");
            if (field == "profile_id") {
                flush_profile();
                profile_.emplace();
                profile_->url = *url;
                profile_->seed_index = seed_index;
                profile_->captured_at = row[5];
                profile_lines_ = 0;
            } else if (!profile_ || profile_->url != *url || profile_->seed_index != seed_index) {
                return skip("profile field outside a profile capture");
            }
            if (!profile_->fields.emplace(field, row[4]).second)
                return skip("repeated profile field '" + field + "'");
            ++profile_lines_;
            return;
        }
        if (kind == "post") {
            auto dot = field.find('.');
            auto index = dot == std::string::npos ? std::nullopt : parse_int(std::string_view(field).substr(0, dot));
            if (!index || *index < 1 || field[0] == '+')
                return skip("bad post field '" + field + "'");
            auto name = field.substr(dot + 1);
            if (!known_post_field(name))
                return skip("unknown post field '" + name + "'");
            auto key = std::make_tuple(*url, seed_index, static_cast<std::size_t>(*index));
            auto it = open_posts_.find(key);
            if (it != open_posts_.end() && it->second.first.fields.count(name)) {
                // Same post captured again: close the earlier copy.
                finish_post(it);
                it = open_posts_.end();
            }
            if (it == open_posts_.end()) {
                Builder b;
                b.url = *url;
                b.seed_index = seed_index;
                b.captured_at = row[5];
                b.post_index = static_cast<std::size_t>(*index);
                it = open_posts_.emplace(key, std::make_pair(std::move(b), order_++)).first;
            }
            it->second.first.fields.emplace(name, row[4]);
            return;
        }
        skip("unknown capture_kind '" + kind + "'");
    }

    void finish()
    {
        flush_profile();
        flush_posts();
    }

private:
    using PostKey = std::tuple<std::string, std::size_t, std::size_t>;
    using OpenPosts = std::map<PostKey, std::pair<Builder, std::uint64_t>>;

    void flush_profile()
    {
        flush_posts();
        if (!profile_)
            return;
        out_.profiles.push_back(build_profile(*profile_));
        out_.consumed_rows += profile_lines_;
        profile_.reset();
        profile_lines_ = 0;
    }

    void finish_post(OpenPosts::iterator it)
    {
        finished_.emplace_back(it->second.second, build_post(it->second.first));
        out_.consumed_rows += it->second.first.fields.size();
        open_posts_.erase(it);
    }

    void flush_posts()
    {
        while (!open_posts_.empty())
            finish_post(open_posts_.begin());
        std::sort(finished_.begin(), finished_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [_, post] : finished_)
            out_.posts.push_back(std::move(post));
        finished_.clear();
    }

    Structured& out_;
    std::optional<Builder> profile_;
    std::uint64_t profile_lines_ = 0;
    OpenPosts open_posts_;
    std::vector<std::pair<std::uint64_t, PostRecord>> finished_;
    std::uint64_t order_ = 0;
};

} // namespace

Structured normalize_raw(std::istream& in)
{
    Structured out;
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row))
        return out;
    if (row_text(row) != kRawHeader)
        throw Error(ErrorCategory::Parse, "BadRawHeader", "raw file does not start with the capture header");
    Normalizer normalizer(out);
    while (reader.next(row))
        normalizer.row(row, reader.line_no());
    normalizer.finish();
    return out;
}

Structured normalize_raw(const fs::path& raw_path)
{
    std::ifstream in(raw_path, std::ios::binary);
    if (!in)
        throw Error(ErrorCategory::Io, "MissingFile", "cannot open raw file " + raw_path.string());
    return normalize_raw(in);
}

} // namespace imcrawler::pipeline
