#include "imcrawler/pipeline/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "imcrawler/util.hpp"

namespace imcrawler::pipeline {

namespace {

std::string column_list(const std::vector<std::string>& cols)
{
    return join(cols, ",");
}

std::string placeholders(std::size_t n)
{
    std::vector<std::string> q(n, "?");
    return join(q, ",");
}

std::string table_sql(const char* name, const std::vector<std::string>& cols, const char* key)
{
    std::vector<std::string> defs;
    for (const auto& c : cols)
        defs.push_back(c + (c == "seed_index" || c == "post_index" ? " INTEGER NOT NULL" : " TEXT NOT NULL"));
    return fmt::format("CREATE TABLE IF NOT EXISTS {} ({}, PRIMARY KEY ({}))", name, join(defs, ", "), key);
}

std::vector<std::string> read_row(sqlite3_stmt* stmt, std::size_t n)
{
    std::vector<std::string> row;
    row.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto text = sqlite3_column_text(stmt, static_cast<int>(i));
        row.emplace_back(text ? reinterpret_cast<const char*>(text) : "");
    }
    return row;
}

// Tag-like markup left in a value: '<' followed by a letter, '/' or '!'.
bool has_markup(std::string_view s)
{
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (s[i] == '<' && (std::isalpha(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '/' || s[i + 1] == '!'))
            return true;
    return false;
}

bool row_valid(const std::vector<std::string>& row)
{
    return std::none_of(row.begin(), row.end(), [](const std::string& c) { return has_markup(c); });
}

template <class T>
bool optional_ok(const Field<T>& f)
{
    if (f.state == FieldState::Value) {
        if constexpr (std::is_same_v<T, std::string>)
            return !f.value.empty();
        return true;
    }
    return f.state != FieldState::NotPresent;
}

bool profile_valid(const ProfileRecord& r)
{
    return !r.profile_id.empty() && optional_ok(r.gender) && optional_ok(r.birthday) && optional_ok(r.email) &&
           optional_ok(r.phone) && optional_ok(r.relationship_status) && optional_ok(r.hometown) &&
           optional_ok(r.current_city) && row_valid(to_row(r));
}

bool post_valid(const PostRecord& p)
{
    return !p.profile_id.empty() && p.post_index >= 1 && row_valid(to_row(p));
}

} // namespace

Store::Store(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("cannot open store " + path.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    auto profiles = table_sql("profiles", profile_columns(), "profile_id");
    auto posts = table_sql("posts", post_columns(), "profile_id, post_index");
    // Avoid touching an existing file: only create what is missing.
    if (count("SELECT count(*) FROM sqlite_master WHERE type='table' AND name IN ('profiles','posts')") < 2) {
        exec(profiles.c_str());
        exec(posts.c_str());
    }
    auto ins_profile = fmt::format("INSERT OR IGNORE INTO profiles ({}) VALUES ({})", column_list(profile_columns()),
                                   placeholders(profile_columns().size()));
    auto ins_post = fmt::format("INSERT OR IGNORE INTO posts ({}) VALUES ({})", column_list(post_columns()),
                                placeholders(post_columns().size()));
    auto sel_profile = fmt::format("SELECT {} FROM profiles WHERE profile_id = ?", column_list(profile_columns()));
    auto sel_post =
        fmt::format("SELECT {} FROM posts WHERE profile_id = ? AND post_index = ?", column_list(post_columns()));
    insert_profile_ = prepare(ins_profile.c_str());
    insert_post_ = prepare(ins_post.c_str());
    select_profile_ = prepare(sel_profile.c_str());
    select_post_ = prepare(sel_post.c_str());
}

Store::~Store()
{
    if (in_batch_)
        sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    for (auto* s : {insert_profile_, insert_post_, select_profile_, select_post_})
        sqlite3_finalize(s);
    sqlite3_close(db_);
}

void Store::exec(const char* sql)
{
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StoreError(fmt::format("{}: {}", sql, msg));
    }
}

sqlite3_stmt* Store::prepare(const char* sql)
{
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db_, sql, -1, &stmt, nullptr) != SQLITE_OK)
        throw StoreError(fmt::format("{}: {}", sql, sqlite3_errmsg(db_)));
    return stmt;
}

std::uint64_t Store::count(const char* sql)
{
    auto* stmt = prepare(sql);
    std::uint64_t n = 0;
    if (sqlite3_step(stmt) == SQLITE_ROW)
        n = static_cast<std::uint64_t>(sqlite3_column_int64(stmt, 0));
    sqlite3_finalize(stmt);
    return n;
}

void Store::begin()
{
    std::lock_guard lock(mutex_);
    if (in_batch_)
        return;
    exec("BEGIN IMMEDIATE");
    changes_at_begin_ = sqlite3_total_changes(db_);
    in_batch_ = true;
}

void Store::end()
{
    std::lock_guard lock(mutex_);
    if (!in_batch_)
        return;
    in_batch_ = false;
    exec(sqlite3_total_changes(db_) == changes_at_begin_ ? "ROLLBACK" : "COMMIT");
}

namespace {

InsertResult insert_row(sqlite3* db, sqlite3_stmt* insert, sqlite3_stmt* select, const std::vector<std::string>& row,
                        const std::vector<std::string>& columns, std::size_t key_columns, std::uint64_t& conflicts,
                        const std::string& what)
{
    sqlite3_reset(insert);
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (columns[i] == "seed_index" || columns[i] == "post_index")
            sqlite3_bind_int64(insert, static_cast<int>(i + 1), parse_int(row[i]).value_or(0));
        else
            sqlite3_bind_text(insert, static_cast<int>(i + 1), row[i].data(), static_cast<int>(row[i].size()),
                              SQLITE_TRANSIENT);
    }
    if (sqlite3_step(insert) != SQLITE_DONE)
        throw StoreError(fmt::format("insert {}: {}", what, sqlite3_errmsg(db)));
    if (sqlite3_changes(db) > 0)
        return InsertResult::Inserted;

    sqlite3_reset(select);
    sqlite3_bind_text(select, 1, row[0].data(), static_cast<int>(row[0].size()), SQLITE_TRANSIENT);
    if (key_columns == 2)
        sqlite3_bind_int64(select, 2, parse_int(row[2]).value_or(0));
    if (sqlite3_step(select) == SQLITE_ROW) {
        auto stored = read_row(select, columns.size());
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == "seed_index" || columns[i] == "captured_at")
                continue;
            if (stored[i] != row[i]) {
                ++conflicts;
                spdlog::warn("conflicting duplicate for {}: column {} kept '{}', ignored '{}'", what, columns[i],
                             stored[i], row[i]);
                break;
            }
        }
    }
    sqlite3_reset(select);
    return InsertResult::Duplicate;
}

} // namespace

InsertResult Store::insert(const ProfileRecord& record)
{
    std::lock_guard lock(mutex_);
    return insert_row(db_, insert_profile_, select_profile_, to_row(record), profile_columns(), 1, conflicts_,
                      "profile " + record.profile_id);
}

InsertResult Store::insert(const PostRecord& record)
{
    std::lock_guard lock(mutex_);
    return insert_row(db_, insert_post_, select_post_, to_row(record), post_columns(), 2, conflicts_,
                      fmt::format("post {}#{}", record.profile_id, record.post_index));
}

std::uint64_t Store::profile_count()
{
    std::lock_guard lock(mutex_);
    return count("SELECT count(*) FROM profiles");
}

std::uint64_t Store::post_count()
{
    std::lock_guard lock(mutex_);
    return count("SELECT count(*) FROM posts");
}

std::optional<ProfileRecord> Store::profile(const std::string& profile_id)
{
    std::lock_guard lock(mutex_);
    sqlite3_reset(select_profile_);
    sqlite3_bind_text(select_profile_, 1, profile_id.data(), static_cast<int>(profile_id.size()), SQLITE_TRANSIENT);
    std::optional<ProfileRecord> out;
    if (sqlite3_step(select_profile_) == SQLITE_ROW)
        out = profile_from_row(read_row(select_profile_, profile_columns().size()));
    sqlite3_reset(select_profile_);
    return out;
}

std::vector<ProfileRecord> Store::profiles()
{
    std::lock_guard lock(mutex_);
    auto sql = fmt::format("SELECT {} FROM profiles ORDER BY profile_id", column_list(profile_columns()));
    auto* stmt = prepare(sql.c_str());
    std::vector<ProfileRecord> out;
    while (sqlite3_step(stmt) == SQLITE_ROW)
        out.push_back(profile_from_row(read_row(stmt, profile_columns().size())));
    sqlite3_finalize(stmt);
    return out;
}

std::vector<PostRecord> Store::posts()
{
    std::lock_guard lock(mutex_);
    auto sql = fmt::format("SELECT {} FROM posts ORDER BY profile_id, post_index", column_list(post_columns()));
    auto* stmt = prepare(sql.c_str());
    std::vector<PostRecord> out;
    while (sqlite3_step(stmt) == SQLITE_ROW)
        out.push_back(post_from_row(read_row(stmt, post_columns().size())));
    sqlite3_finalize(stmt);
    return out;
}

nlohmann::json LoadReport::to_json() const
{
    return {{"profiles_inserted", profiles_inserted}, {"profiles_duplicate", profiles_duplicate},
            {"posts_inserted", posts_inserted},       {"posts_duplicate", posts_duplicate},
            {"skipped_junk", skipped_junk},           {"skipped_invalid", skipped_invalid},
            {"conflicts", conflicts}};
}

LoadReport load(Store& store, const Structured& data, const std::vector<VerificationReport>* reports)
{
    std::set<std::pair<std::string, std::size_t>> junk;
    if (reports)
        for (const auto& r : *reports)
            if (r.junk())
                junk.insert({r.profile_id, r.seed_index});

    LoadReport rep;
    auto conflicts_before = store.conflicts();
    store.begin();
    try {
        for (const auto& p : data.profiles) {
            if (junk.count({p.profile_id, p.seed_index})) {
                ++rep.skipped_junk;
                continue;
            }
            if (!profile_valid(p)) {
                ++rep.skipped_invalid;
                continue;
            }
            if (store.insert(p) == InsertResult::Inserted)
                ++rep.profiles_inserted;
            else
                ++rep.profiles_duplicate;
        }
        for (const auto& p : data.posts) {
            if (junk.count({p.profile_id, p.seed_index}))
                continue;
            if (!post_valid(p)) {
                ++rep.skipped_invalid;
                continue;
            }
            if (store.insert(p) == InsertResult::Inserted)
                ++rep.posts_inserted;
            else
                ++rep.posts_duplicate;
        }
    } catch (...) {
        store.end();
        throw;
    }
    store.end();
    rep.conflicts = store.conflicts() - conflicts_before;
    return rep;
}

std::vector<ProfileRecord> filter_by_city(Store& store, const std::vector<std::string>& cities)
{
    std::unordered_set<std::string> wanted;
    for (const auto& c : cities) {
        auto key = to_lower(trim(c));
        if (!key.empty())
            wanted.insert(key);
    }
    std::vector<ProfileRecord> out;
    if (wanted.empty())
        return out;
    for (auto& p : store.profiles())
        if (p.current_city.has_value() && wanted.count(to_lower(trim(p.current_city.value))))
            out.push_back(std::move(p));
    return out;
}

const std::vector<std::string>& disclosure_attributes()
{
    static const std::vector<std::string> names = {
        "gender",   "birthday",     "email",          "phone",       "relationship_status",
        "hometown", "current_city", "family_members", "pages_liked", "groups_joined",
    };
    return names;
}

nlohmann::json behavior_summary(Store& store, const std::vector<std::string>& population)
{
    if (population.empty())
        throw Error(ErrorCategory::Param, "EmptyPopulation", "population has no profiles");

    std::unordered_map<std::string, ProfileRecord> by_id;
    for (auto& p : store.profiles())
        by_id.emplace(p.profile_id, std::move(p));
    std::vector<const ProfileRecord*> members;
    std::unordered_set<std::string> ids;
    for (const auto& id : population) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw Error(ErrorCategory::Param, "UnknownProfile", "profile " + id + " is not in the store");
        if (ids.insert(id).second)
            members.push_back(&it->second);
    }
    auto n = static_cast<double>(members.size());

    nlohmann::json disclosure = nlohmann::json::object();
    for (const auto& attr : disclosure_attributes()) {
        std::uint64_t disclosed = 0;
        std::uint64_t hidden = 0;
        std::uint64_t unknown = 0;
        for (const auto* p : members) {
            FieldState state = FieldState::Missing;
            if (attr == "gender") state = p->gender.state;
            else if (attr == "birthday") state = p->birthday.state;
            else if (attr == "email") state = p->email.state;
            else if (attr == "phone") state = p->phone.state;
            else if (attr == "relationship_status") state = p->relationship_status.state;
            else if (attr == "hometown") state = p->hometown.state;
            else if (attr == "current_city") state = p->current_city.state;
            else if (attr == "family_members") state = p->family_members.state;
            else if (attr == "pages_liked") state = p->pages_liked.state;
            else if (attr == "groups_joined") state = p->groups_joined.state;
            if (state == FieldState::Value)
                ++disclosed;
            else if (state == FieldState::NotDisclosed)
                ++hidden;
            else
                ++unknown;
        }
        disclosure[attr] = {{"disclosed", disclosed},
                            {"not_disclosed", hidden},
                            {"unknown", unknown},
                            {"rate", static_cast<double>(disclosed) / n}};
    }

    std::map<std::string, std::uint64_t> by_type;
    for (const auto& t : kPostTypes)
        by_type[t] = 0;
    std::map<std::string, std::int64_t> emotions;
    std::map<std::string, std::uint64_t> tag_counts;
    std::unordered_map<std::string, std::uint64_t> per_profile;
    std::uint64_t total_posts = 0;
    std::uint64_t tagged_posts = 0;
    std::int64_t reaction_sum = 0;
    for (const auto& post : store.posts()) {
        if (!ids.count(post.profile_id))
            continue;
        ++total_posts;
        ++per_profile[post.profile_id];
        ++by_type[post.post_type.has_value() ? post.post_type.value : "unknown"];
        if (post.reaction_total.has_value())
            reaction_sum += post.reaction_total.value;
        if (post.emotion_counts.has_value())
            for (const auto& [kind, count] : post.emotion_counts.value)
                emotions[kind] += count;
        if (post.tags.has_value() && !post.tags.value.empty()) {
            ++tagged_posts;
            for (const auto& t : post.tags.value)
                ++tag_counts[t];
        }
    }

    std::uint64_t min_posts = UINT64_MAX;
    std::uint64_t max_posts = 0;
    for (const auto* p : members) {
        auto it = per_profile.find(p->profile_id);
        auto c = it == per_profile.end() ? 0 : it->second;
        min_posts = std::min(min_posts, c);
        max_posts = std::max(max_posts, c);
    }

    std::vector<std::pair<std::string, std::uint64_t>> tags(tag_counts.begin(), tag_counts.end());
    std::stable_sort(tags.begin(), tags.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    nlohmann::json top_tags = nlohmann::json::array();
    for (std::size_t i = 0; i < tags.size() && i < 10; ++i)
        top_tags.push_back({{"profile_id", tags[i].first}, {"count", tags[i].second}});

    return {
        {"population", members.size()},
        {"disclosure", disclosure},
        {"posts",
         {{"total", total_posts},
          {"by_type", by_type},
          {"per_profile", {{"min", min_posts}, {"max", max_posts}, {"mean", static_cast<double>(total_posts) / n}}},
          {"reaction_total", reaction_sum},
          {"emotions", emotions},
          {"tagged_posts", tagged_posts},
          {"top_tags", top_tags}}},
    };
}

} // namespace imcrawler::pipeline
