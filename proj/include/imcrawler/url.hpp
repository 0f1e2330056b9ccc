#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace imcrawler {

struct Url {
    std::string scheme;  // lower-cased
    std::string host;    // lower-cased
    int port = 0;        // 0 when absent
    std::string path;    // always starts with '/'
    std::string query;   // without '?'

    // scheme://host[:port]
    std::string origin() const;
    std::string str() const;
};

// Absolute http/https URLs only.
std::optional<Url> parse_url(std::string_view text);

// Resolves an href found on a page against the page's origin. Handles
// absolute URLs and root-relative paths, which is all the templates use.
std::optional<Url> resolve_href(const Url& base, std::string_view href);

// Canonical profile URL used as dedup key: lower-case origin, no query,
// no trailing slash. Returns nullopt unless the path has a non-empty
// segment to identify the profile.
std::optional<std::string> normalize_profile_url(std::string_view text);

// Last non-empty path segment of a profile URL.
std::optional<std::string> profile_id_from_url(std::string_view text);

} // namespace imcrawler
