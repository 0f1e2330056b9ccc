#pragma once

// HTML rendering of fixture profiles. Every page kind uses one fixed
// template; element identifiers are listed in docs/fixture-schema.md.

#include <cstdint>
#include <string>
#include <vector>

#include "imcrawler/fixture/network.hpp"

namespace imcrawler::fixture {

struct HtmlPage {
    enum class Kind { About, Friends, Timeline };
    Kind kind = Kind::About;
    int page = 1;          // 1-based within its chain
    std::string path;      // request path including query
    std::string html;
    bool has_next = false;
};

// "1.2K" style counts: values >= 1000 are abbreviated only when the short
// form parses back exactly (K = x1000, M = x1,000,000).
std::string format_count(std::int64_t n);

std::size_t page_count(std::size_t items, std::size_t page_size);

std::string render_about(const FixtureNetwork& network, const FixtureProfile& profile);
// page is 1-based; throws FixtureError{UnknownProfile} for ids not in the network.
HtmlPage render_friends_page(const FixtureNetwork& network, const std::string& profile_id, std::size_t page,
                             std::size_t page_size);
HtmlPage render_timeline_page(const FixtureNetwork& network, const std::string& profile_id, std::size_t page,
                              std::size_t page_size);
std::string render_login_wall();

// About page, every friends page and every timeline page for one profile.
std::vector<HtmlPage> render_profile_pages(const FixtureNetwork& network, const std::string& profile_id,
                                           std::size_t page_size);

} // namespace imcrawler::fixture
