#include "imcrawler/pipeline/verify.hpp"

#include <map>

#include <fmt/format.h>

#include "imcrawler/config_io.hpp"
#include "imcrawler/csv.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler::pipeline {

namespace {

using CaptureKey = std::pair<std::string, std::size_t>;

template <class T>
bool section_ok(const Field<T>& f)
{
    return f.state == FieldState::Value || f.state == FieldState::NotDisclosed;
}

template <class T>
bool unparseable(const Field<T>& f)
{
    return f.state == FieldState::Unparseable;
}

std::vector<std::string> bad_sections(const ProfileRecord& r)
{
    std::vector<std::string> bad;
    auto check = [&](const auto& f, const char* name) {
        if (!section_ok(f))
            bad.emplace_back(name);
    };
    check(r.gender, "gender");
    check(r.birthday, "birthday");
    check(r.email, "email");
    check(r.phone, "phone");
    check(r.relationship_status, "relationship_status");
    check(r.hometown, "hometown");
    check(r.current_city, "current_city");
    check(r.family_members, "family_members");
    check(r.pages_liked, "pages_liked");
    check(r.groups_joined, "groups_joined");
    return bad;
}

bool profile_unparseable(const ProfileRecord& r)
{
    return unparseable(r.page_profile_id) || unparseable(r.friend_count) || unparseable(r.gender) ||
           unparseable(r.birthday) || unparseable(r.email) || unparseable(r.phone) ||
           unparseable(r.relationship_status) || unparseable(r.hometown) || unparseable(r.current_city) ||
           unparseable(r.family_members) || unparseable(r.pages_liked) || unparseable(r.groups_joined);
}

bool post_unparseable(const PostRecord& p)
{
    return unparseable(p.post_type) || unparseable(p.title) || unparseable(p.content) || unparseable(p.date) ||
           unparseable(p.time) || unparseable(p.comment_count) || unparseable(p.emotion_counts) ||
           unparseable(p.share_count) || unparseable(p.view_count) || unparseable(p.reaction_total) ||
           unparseable(p.tags);
}

bool post_missing(const PostRecord& p)
{
    auto m = [](const auto& f) { return f.state == FieldState::Missing; };
    return m(p.post_type) || m(p.title) || m(p.content) || m(p.date) || m(p.time) || m(p.comment_count) ||
           m(p.emotion_counts) || m(p.share_count) || m(p.view_count) || m(p.reaction_total) || m(p.tags);
}

const char* verdict_name(Verdict v)
{
    return v == Verdict::Ok ? "ok" : "junk";
}

} // namespace

const std::vector<std::string>& check_names()
{
    static const std::vector<std::string> names = {
        "profile_id_present", "friend_count_parseable", "sections_complete", "page_complete",
        "posts_within_limit", "posts_complete",         "no_unparseable",    "reaction_total_consistent",
    };
    return names;
}

const std::set<std::string>& default_required_checks()
{
    static const std::set<std::string> required = {
        "profile_id_present", "friend_count_parseable", "sections_complete", "page_complete",
        "posts_within_limit", "posts_complete",         "no_unparseable",
    };
    return required;
}

std::vector<VerificationReport> verify(const Structured& data, const VerificationPolicy& policy)
{
    std::map<CaptureKey, std::vector<const PostRecord*>> posts;
    for (const auto& p : data.posts)
        posts[{p.profile_id, p.seed_index}].push_back(&p);

    std::vector<VerificationReport> reports;
    reports.reserve(data.profiles.size());
    for (const auto& r : data.profiles) {
        VerificationReport rep;
        rep.profile_id = r.profile_id;
        rep.profile_url = r.profile_url;
        rep.seed_index = r.seed_index;
        auto add = [&](const std::string& name, bool passed, std::string detail = {}) {
            rep.checks.push_back({name, passed, policy.required.count(name) > 0, passed ? "" : std::move(detail)});
        };

        add("profile_id_present",
            !r.profile_id.empty() && r.page_profile_id.has_value() && r.page_profile_id.value == r.profile_id,
            r.page_profile_id.has_value() ? "page shows id " + r.page_profile_id.value : "no id on page");
        add("friend_count_parseable", r.friend_count.has_value() && r.friend_count.value >= 0,
            "friend_count " + encode(r.friend_count));
        auto bad = bad_sections(r);
        add("sections_complete", bad.empty(), "incomplete: " + join(bad, ";"));
        add("page_complete", r.page_complete, "page end marker missing");

        static const std::vector<const PostRecord*> kNone;
        auto it = posts.find({r.profile_id, r.seed_index});
        const auto& mine = it == posts.end() ? kNone : it->second;

        std::size_t max_index = 0;
        bool any_missing = false;
        bool any_unparseable = profile_unparseable(r);
        std::vector<std::string> inconsistent;
        for (const auto* p : mine) {
            max_index = std::max(max_index, p->post_index);
            any_missing = any_missing || post_missing(*p);
            any_unparseable = any_unparseable || post_unparseable(*p);
            if (p->reaction_total.has_value() && p->emotion_counts.has_value()) {
                std::int64_t sum = 0;
                for (const auto& [_, n] : p->emotion_counts.value)
                    sum += n;
                if (sum != p->reaction_total.value)
                    inconsistent.push_back(fmt::format("post {}: {} != {}", p->post_index, p->reaction_total.value, sum));
            }
        }
        add("posts_within_limit",
            policy.total_post <= 0 || max_index <= static_cast<std::size_t>(policy.total_post),
            fmt::format("post index {} exceeds {}", max_index, policy.total_post));
        add("posts_complete", !any_missing, "post field missing");
        add("no_unparseable", !any_unparseable, "unparseable value present");
        add("reaction_total_consistent", inconsistent.empty(), join(inconsistent, ";"));

        for (const auto& c : rep.checks)
            if (c.required && !c.passed)
                rep.verdict = Verdict::Junk;
        reports.push_back(std::move(rep));
    }
    return reports;
}

void write_reports(const fs::path& path, const std::vector<VerificationReport>& reports)
{
    std::vector<csv::Row> rows = {
        {"profile_id", "profile_url", "seed_index", "verdict", "failed_required", "failed_advisory", "detail"}};
    for (const auto& r : reports) {
        std::vector<std::string> required;
        std::vector<std::string> advisory;
        std::vector<std::string> details;
        for (const auto& c : r.checks) {
            if (c.passed)
                continue;
            (c.required ? required : advisory).push_back(c.name);
            details.push_back(c.name + ": " + c.detail);
        }
        rows.push_back({r.profile_id, r.profile_url, std::to_string(r.seed_index), verdict_name(r.verdict),
                        join(required, ";"), join(advisory, ";"), join(details, " | ")});
    }
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    csv::write_file(path, rows);
}

std::vector<VerificationReport> read_reports(const fs::path& path)
{
    auto rows = csv::read_file(path);
    std::vector<VerificationReport> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 7)
            throw Error(ErrorCategory::Parse, "BadReportRow", fmt::format("{}: line {}", path.string(), i + 1));
        VerificationReport r;
        r.profile_id = row[0];
        r.profile_url = row[1];
        r.seed_index = static_cast<std::size_t>(parse_int(row[2]).value_or(0));
        r.verdict = row[3] == "junk" ? Verdict::Junk : Verdict::Ok;
        for (const auto& name : split(row[4], ';'))
            if (!name.empty())
                r.checks.push_back({name, false, true, {}});
        for (const auto& name : split(row[5], ';'))
            if (!name.empty())
                r.checks.push_back({name, false, false, {}});
        out.push_back(std::move(r));
    }
    return out;
}

std::size_t emit_reextract_list(const std::vector<VerificationReport>& reports, const fs::path& out_path)
{
    LinkList links;
    for (const auto& r : reports)
        if (r.junk())
            append_unique(links, r.profile_url);
    write_links_file(out_path, links);
    return links.size();
}

} // namespace imcrawler::pipeline
