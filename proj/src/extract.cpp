#include "imcrawler/extract.hpp"

#include <optional>
#include <unordered_set>

#include <json.hpp>

#include "imcrawler/url.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler {

namespace {

using dom::DomTree;
using dom::NodeId;
using dom::RuleSet;

std::optional<std::string> capture_one(const DomTree& dom, const RuleSet& rules, std::string_view name,
                                       NodeId context = 0)
{
    auto values = dom::apply_rule(dom, rules.get(name), context);
    if (values.empty())
        return std::nullopt;
    return std::move(values.front());
}

std::string json_list(const std::vector<std::string>& values)
{
    return nlohmann::json(values).dump();
}

const std::string* find_field(const std::vector<RawField>& fields, std::string_view name)
{
    for (const auto& f : fields)
        if (f.name == name)
            return &f.value;
    return nullptr;
}

std::string page_url(const std::string& profile_url, std::string_view suffix)
{
    return profile_url + std::string(suffix);
}

} // namespace

const std::string* RawProfileCapture::find(std::string_view name) const
{
    return find_field(fields, name);
}

const std::string* RawPostCapture::find(std::string_view name) const
{
    return find_field(fields, name);
}

const std::vector<std::string>& profile_field_names()
{
    static const std::vector<std::string> names = {
        "profile_id",
        "friend_count",
        "basic_information.gender",
        "basic_information.birthday",
        "basic_information.email",
        "basic_information.phone",
        "places_lived.hometown",
        "places_lived.current_city",
        "family_and_relationship.relationship_status",
        "family_and_relationship.family_members",
        "pages_liked",
        "groups_joined",
        "page_complete",
    };
    return names;
}

const std::vector<std::string>& post_field_names()
{
    static const std::vector<std::string> names = {
        "type", "title", "content", "date", "time", "tags", "reactions", "emotions", "comments", "shares", "views",
    };
    return names;
}

RawProfileCapture capture_about_page(const DomTree& dom, const RuleSet& rules)
{
    RawProfileCapture cap;
    auto add = [&](std::string name, std::string value) { cap.fields.push_back({std::move(name), std::move(value)}); };
    auto field = [&](std::string name, std::string_view rule) {
        add(std::move(name), capture_one(dom, rules, rule).value_or(std::string(kNotDisclosed)));
    };

    add("profile_id", capture_one(dom, rules, "profile.id").value_or(std::string(kMissing)));
    add("friend_count", capture_one(dom, rules, "profile.friend_count").value_or(std::string(kMissing)));
    field("basic_information.gender", "profile.gender");
    field("basic_information.birthday", "profile.birthday");
    field("basic_information.email", "profile.email");
    field("basic_information.phone", "profile.phone");
    field("places_lived.hometown", "profile.hometown");
    field("places_lived.current_city", "profile.current_city");
    field("family_and_relationship.relationship_status", "profile.relationship");

    if (capture_one(dom, rules, "profile.family_list"))
        add("family_and_relationship.family_members",
            json_list(dom::apply_rule(dom, rules.get("profile.family_members"))));
    else
        add("family_and_relationship.family_members", std::string(kNotDisclosed));

    if (capture_one(dom, rules, "profile.pages_section"))
        add("pages_liked", json_list(dom::apply_rule(dom, rules.get("profile.pages_liked"))));
    else
        add("pages_liked", std::string(kNotDisclosed));

    if (capture_one(dom, rules, "profile.groups_section"))
        add("groups_joined", json_list(dom::apply_rule(dom, rules.get("profile.groups_joined"))));
    else
        add("groups_joined", std::string(kNotDisclosed));

    add("page_complete", capture_one(dom, rules, "profile.page_end").value_or("0"));
    return cap;
}

std::vector<RawPostCapture> capture_timeline_page(const DomTree& dom, const RuleSet& rules)
{
    std::vector<RawPostCapture> posts;
    const auto& post_rule = rules.get("timeline.post");
    for (auto node : dom::match_rule(dom, post_rule)) {
        RawPostCapture cap;
        auto add = [&](std::string name, std::string value) {
            cap.fields.push_back({std::move(name), std::move(value)});
        };
        auto type = dom::capture_node(dom, node, post_rule.capture);
        add("type", type.empty() ? std::string(kMissing) : type);
        for (const auto& name : post_field_names()) {
            if (name == "type")
                continue;
            const auto& rule = rules.get("post." + name);
            if (rule.multiplicity == dom::Multiplicity::Many) {
                add(name, json_list(dom::apply_rule(dom, rule, node)));
                continue;
            }
            auto value = capture_one(dom, rules, rule.name, node);
            if (value)
                add(name, std::move(*value));
            else
                add(name, std::string(name == "views" ? kNotPresent : kMissing));
        }
        posts.push_back(std::move(cap));
    }
    return posts;
}

LinkList extract_friend_links(Session& session, const std::string& profile_url, const RuleSet& rules)
{
    LinkList links;
    std::unordered_set<std::string> seen_pages;
    std::string next = page_url(profile_url, "/friends?page=1");
    std::size_t fetched = 0;
    while (!next.empty() && seen_pages.insert(next).second) {
        Page page;
        try {
            page = session.get(next);
        } catch (const AuthExpired&) {
            throw AuthExpired(fetched);
        } catch (const FetchError& e) {
            throw FetchError(e.status(), e.url(), fetched + 1);
        }
        ++fetched;
        auto dom = dom::parse_dom(page.body);
        for (const auto& href : dom::apply_rule(dom, rules.get("friends.link"))) {
            auto url = resolve_href(page.url, href);
            if (!url)
                continue;
            if (auto norm = normalize_profile_url(url->str()))
                append_unique(links, *norm);
        }
        next.clear();
        if (auto href = capture_one(dom, rules, "friends.next"))
            if (auto url = resolve_href(page.url, *href))
                next = url->str();
    }
    return links;
}

RawProfileCapture extract_personal_attributes(Session& session, const std::string& profile_url, const RuleSet& rules)
{
    auto page = session.get(page_url(profile_url, "/about"));
    auto cap = capture_about_page(dom::parse_dom(page.body), rules);
    cap.profile_url = profile_url;
    cap.seed_index = session.seed_index();
    cap.captured_at = timestamp_now();
    return cap;
}

std::vector<RawPostCapture> extract_post_attributes(Session& session, const std::string& profile_url,
                                                    std::int64_t total_post, const RuleSet& rules)
{
    std::vector<RawPostCapture> out;
    if (total_post < 1)
        return out;
    auto limit = static_cast<std::size_t>(total_post);
    std::unordered_set<std::string> seen_pages;
    std::string next = page_url(profile_url, "/timeline?page=1");
    std::size_t fetched = 0;
    while (out.size() < limit && !next.empty() && seen_pages.insert(next).second) {
        Page page;
        try {
            page = session.get(next);
        } catch (const AuthExpired&) {
            throw AuthExpired(fetched);
        } catch (const FetchError& e) {
            throw FetchError(e.status(), e.url(), fetched + 1);
        }
        ++fetched;
        auto dom = dom::parse_dom(page.body);
        auto stamp = timestamp_now();
        for (auto& post : capture_timeline_page(dom, rules)) {
            if (out.size() == limit)
                break;
            post.profile_url = profile_url;
            post.seed_index = session.seed_index();
            post.captured_at = stamp;
            post.post_index = out.size() + 1;
            out.push_back(std::move(post));
        }
        next.clear();
        if (auto href = capture_one(dom, rules, "timeline.next"))
            if (auto url = resolve_href(page.url, *href))
                next = url->str();
    }
    return out;
}

} // namespace imcrawler
