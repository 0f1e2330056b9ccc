#pragma once

// Persistent record store (SQLite) keyed by profile id and
// (profile id, post index). The first write of a key wins.

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imcrawler/error.hpp"
#include "imcrawler/pipeline/records.hpp"
#include "imcrawler/pipeline/verify.hpp"

struct sqlite3;
struct sqlite3_stmt;

namespace imcrawler::pipeline {

class StoreError : public Error {
public:
    explicit StoreError(const std::string& message) : Error(ErrorCategory::Store, "StoreFailure", message) {}
};

enum class InsertResult { Inserted, Duplicate };

class Store {
public:
    explicit Store(const fs::path& path);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // Safe to call from several threads; per key exactly one caller sees
    // Inserted. A duplicate whose content differs from the stored row is
    // counted in conflicts() and logged.
    InsertResult insert(const ProfileRecord& record);
    InsertResult insert(const PostRecord& record);

    // Groups inserts in one transaction. When nothing changed the
    // transaction is rolled back so the file is left untouched.
    void begin();
    void end();

    std::uint64_t profile_count();
    std::uint64_t post_count();
    std::optional<ProfileRecord> profile(const std::string& profile_id);
    std::vector<ProfileRecord> profiles();  // ordered by profile_id
    std::vector<PostRecord> posts();        // ordered by profile_id, post_index
    std::uint64_t conflicts() const noexcept { return conflicts_; }

private:
    void exec(const char* sql);
    std::uint64_t count(const char* sql);
    sqlite3_stmt* prepare(const char* sql);

    std::mutex mutex_;
    sqlite3* db_ = nullptr;
    sqlite3_stmt* insert_profile_ = nullptr;
    sqlite3_stmt* insert_post_ = nullptr;
    sqlite3_stmt* select_profile_ = nullptr;
    sqlite3_stmt* select_post_ = nullptr;
    std::uint64_t conflicts_ = 0;
    int changes_at_begin_ = 0;
    bool in_batch_ = false;
};

struct LoadReport {
    std::uint64_t profiles_inserted = 0;
    std::uint64_t profiles_duplicate = 0;
    std::uint64_t posts_inserted = 0;
    std::uint64_t posts_duplicate = 0;
    std::uint64_t skipped_junk = 0;     // profiles (with their posts) left out as junk
    std::uint64_t skipped_invalid = 0;  // records breaking store invariants
    std::uint64_t conflicts = 0;

    nlohmann::json to_json() const;
};

// Loads structured records in one batch. With reports, junk profile
// captures and their posts are skipped.
LoadReport load(Store& store, const Structured& data, const std::vector<VerificationReport>* reports = nullptr);

// Profiles whose current city (trimmed, case-insensitive) is one of
// `cities`, ordered by profile_id.
std::vector<ProfileRecord> filter_by_city(Store& store, const std::vector<std::string>& cities);

// The attributes counted for disclosure statistics.
const std::vector<std::string>& disclosure_attributes();

// Disclosure rates and post statistics for the given profile ids. Throws
// Error{Param, EmptyPopulation} for an empty population and
// Error{Param, UnknownProfile} for ids missing from the store.
nlohmann::json behavior_summary(Store& store, const std::vector<std::string>& population);

} // namespace imcrawler::pipeline
