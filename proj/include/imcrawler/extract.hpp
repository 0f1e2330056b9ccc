#pragma once

// Page-level extraction: friend lists, About pages and timelines, driven by
// a RuleSet. Captured values keep markup; the pipeline cleans them.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "imcrawler/config_io.hpp"
#include "imcrawler/dom/html.hpp"
#include "imcrawler/dom/rules.hpp"
#include "imcrawler/session.hpp"

namespace imcrawler {

// Section or field hidden by the profile owner.
inline constexpr std::string_view kNotDisclosed = "NOT_DISCLOSED";
// Field that does not apply to this item (views on a non-video post).
inline constexpr std::string_view kNotPresent = "NOT_PRESENT";
// Element expected on every page but not found.
inline constexpr std::string_view kMissing = "MISSING";

struct RawField {
    std::string name;
    std::string value;

    bool operator==(const RawField&) const = default;
};

struct RawProfileCapture {
    std::string profile_url;
    std::size_t seed_index = 0;
    std::string captured_at;
    std::vector<RawField> fields;

    const std::string* find(std::string_view name) const;
};

struct RawPostCapture {
    std::string profile_url;
    std::size_t seed_index = 0;
    std::string captured_at;
    std::size_t post_index = 0;  // 1-based, newest first
    std::vector<RawField> fields;

    const std::string* find(std::string_view name) const;
};

// Field names written for profiles, in capture order.
const std::vector<std::string>& profile_field_names();
// Field names written for each post, in capture order.
const std::vector<std::string>& post_field_names();

// Pure captures over an already parsed page.
RawProfileCapture capture_about_page(const dom::DomTree& dom, const dom::RuleSet& rules);
std::vector<RawPostCapture> capture_timeline_page(const dom::DomTree& dom, const dom::RuleSet& rules);

// Follows `next` links until the chain ends. Links come back normalized,
// deduplicated, in page order. AuthExpired reports the pages already
// fetched; FetchError reports the failing page number.
LinkList extract_friend_links(Session& session, const std::string& profile_url,
                              const dom::RuleSet& rules = dom::RuleSet::defaults());

RawProfileCapture extract_personal_attributes(Session& session, const std::string& profile_url,
                                              const dom::RuleSet& rules = dom::RuleSet::defaults());

// Reads timeline pages only until total_post posts are in hand.
std::vector<RawPostCapture> extract_post_attributes(Session& session, const std::string& profile_url,
                                                    std::int64_t total_post,
                                                    const dom::RuleSet& rules = dom::RuleSet::defaults());

} // namespace imcrawler
