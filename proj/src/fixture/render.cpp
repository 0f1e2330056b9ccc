#include "imcrawler/fixture/render.hpp"

#include <fmt/format.h>

#include "imcrawler/util.hpp"

namespace imcrawler::fixture {

namespace {

std::string display_gender(Gender g)
{
    switch (g) {
    case Gender::Male: return "Male";
    case Gender::Female: return "Female";
    case Gender::Unspecified: return "Unspecified";
    }
    return "Unspecified";
}

std::string display_relationship(Relationship r)
{
    switch (r) {
    case Relationship::Single: return "Single";
    case Relationship::InARelationship: return "In a relationship";
    case Relationship::Engaged: return "Engaged";
    case Relationship::Married: return "Married";
    case Relationship::Complicated: return "It's complicated";
    }
    return "Single";
}

void open_document(std::string& out, const FixtureProfile& p, std::string_view title, std::string_view page_class,
                   std::size_t page)
{
    out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head><meta charset=\"utf-8\"><title>";
    out += escape_html(p.display_name);
    out += " | ";
    out += title;
    out += "</title></head>\n<body>\n";
    out += fmt::format("<div id=\"page\" class=\"{}\" data-profile-id=\"{}\" data-page=\"{}\">\n", page_class,
                       escape_html(p.profile_id), page);
    out += fmt::format("<header id=\"profile-header\"><h1 id=\"profile-name\">{}</h1>\n", escape_html(p.display_name));
    out += fmt::format("<nav id=\"profile-nav\"><a href=\"/profile/{0}/about\">About</a> "
                       "<a href=\"/profile/{0}/friends?page=1\">Friends</a> "
                       "<a href=\"/profile/{0}/timeline?page=1\">Timeline</a></nav></header>\n",
                       escape_html(p.profile_id));
}

void close_document(std::string& out)
{
    out += "<footer id=\"page-end\" data-complete=\"1\"></footer>\n</div>\n</body>\n</html>\n";
}

void field_item(std::string& out, std::string_view field, std::string_view label, const std::string& value)
{
    out += fmt::format("<li class=\"field\" data-field=\"{}\"><span class=\"label\">{}</span> "
                       "<span class=\"value\">{}</span></li>\n",
                       field, label, escape_html(value));
}

void next_link(std::string& out, const std::string& href)
{
    out += fmt::format("<div class=\"pager\"><a id=\"next-page\" rel=\"next\" href=\"{}\">See more</a></div>\n",
                       escape_html(href));
}

} // namespace

std::string format_count(std::int64_t n)
{
    if (n < 1000)
        return std::to_string(n);
    if (n < 1'000'000 && n % 100 == 0) {
        auto tenths = (n % 1000) / 100;
        return tenths ? fmt::format("{}.{}K", n / 1000, tenths) : fmt::format("{}K", n / 1000);
    }
    if (n % 100'000 == 0) {
        auto tenths = (n % 1'000'000) / 100'000;
        return tenths ? fmt::format("{}.{}M", n / 1'000'000, tenths) : fmt::format("{}M", n / 1'000'000);
    }
    auto digits = std::to_string(n);
    for (auto i = static_cast<std::ptrdiff_t>(digits.size()) - 3; i > 0; i -= 3)
        digits.insert(static_cast<std::size_t>(i), ",");
    return digits;
}

std::size_t page_count(std::size_t items, std::size_t page_size)
{
    if (items == 0)
        return 1;
    return (items + page_size - 1) / page_size;
}

std::string render_about(const FixtureNetwork& network, const FixtureProfile& p)
{
    std::string out;
    out.reserve(4096);
    open_document(out, p, "About", "about-page", 1);

    auto idx = network.index_of(p.profile_id);
    auto friend_count = idx ? network.neighbors(*idx).size() : 0;
    out += fmt::format("<div id=\"friend-count\"><span class=\"count\">{}</span> friends</div>\n",
                       format_count(static_cast<std::int64_t>(friend_count)));

    out += "<section id=\"basic-information\"><h2>Basic Information</h2>\n<ul>\n";
    if (p.discloses(Attribute::Gender))
        field_item(out, "gender", "Gender", display_gender(p.gender));
    if (p.discloses(Attribute::Birthday))
        field_item(out, "birthday", "Birthday", human_date(p.birthday));
    if (p.discloses(Attribute::Email))
        field_item(out, "email", "Email", p.email);
    if (p.discloses(Attribute::Phone))
        field_item(out, "phone", "Mobile", p.phone);
    out += "</ul>\n</section>\n";

    out += "<section id=\"places-lived\"><h2>Places Lived</h2>\n<ul>\n";
    if (p.discloses(Attribute::Hometown))
        field_item(out, "hometown", "Hometown", p.hometown);
    if (p.discloses(Attribute::CurrentCity))
        field_item(out, "current-city", "Current city", p.current_city);
    out += "</ul>\n</section>\n";

    out += "<section id=\"family-and-relationship\"><h2>Family and Relationships</h2>\n";
    if (p.discloses(Attribute::RelationshipStatus))
        out += fmt::format("<div class=\"field\" data-field=\"relationship\"><span class=\"value\">{}</span></div>\n",
                           escape_html(display_relationship(p.relationship_status)));
    if (p.discloses(Attribute::FamilyMembers)) {
        out += "<ul class=\"family\">\n";
        for (const auto& member : p.family_members) {
            std::string name = member;
            if (auto m = network.index_of(member))
                name = network.profile(*m).display_name;
            out += fmt::format("<li class=\"family-member\" data-profile-id=\"{0}\"><a href=\"/profile/{0}\">{1}</a></li>\n",
                               escape_html(member), escape_html(name));
        }
        out += "</ul>\n";
    }
    out += "</section>\n";

    if (p.discloses(Attribute::PagesLiked)) {
        out += "<section id=\"pages-liked\"><h2>Pages</h2>\n<ul>\n";
        for (const auto& page : p.pages_liked)
            out += "<li class=\"page\"><a class=\"page-name\">" + escape_html(page) + "</a></li>\n";
        out += "</ul>\n</section>\n";
    }
    if (p.discloses(Attribute::GroupsJoined)) {
        out += "<section id=\"groups-joined\"><h2>Groups</h2>\n<ul>\n";
        for (const auto& group : p.groups_joined)
            out += "<li class=\"group\"><a class=\"group-name\">" + escape_html(group) + "</a></li>\n";
        out += "</ul>\n</section>\n";
    }
    close_document(out);
    return out;
}

HtmlPage render_friends_page(const FixtureNetwork& network, const std::string& profile_id, std::size_t page,
                             std::size_t page_size)
{
    const auto& p = network.profile(profile_id);
    const auto& friends = network.neighbors(*network.index_of(profile_id));
    HtmlPage out;
    out.kind = HtmlPage::Kind::Friends;
    out.page = static_cast<int>(page);
    out.path = fmt::format("/profile/{}/friends?page={}", profile_id, page);
    auto pages = page_count(friends.size(), page_size);
    if (page < 1 || page > pages)
        throw FixtureError(FixtureError::Kind::UnknownProfile, out.path);

    std::string& html = out.html;
    open_document(html, p, "Friends", "friends-page", page);
    html += "<ul id=\"friend-list\">\n";
    auto begin = (page - 1) * page_size;
    auto end = std::min(friends.size(), begin + page_size);
    for (auto i = begin; i < end; ++i) {
        const auto& f = network.profile(friends[i]);
        html += fmt::format("<li class=\"friend\"><a class=\"friend-link\" href=\"/profile/{}\">{}</a></li>\n",
                            escape_html(f.profile_id), escape_html(f.display_name));
    }
    html += "</ul>\n";
    if (page < pages) {
        out.has_next = true;
        next_link(html, fmt::format("/profile/{}/friends?page={}", profile_id, page + 1));
    }
    close_document(html);
    return out;
}

HtmlPage render_timeline_page(const FixtureNetwork& network, const std::string& profile_id, std::size_t page,
                              std::size_t page_size)
{
    const auto& p = network.profile(profile_id);
    HtmlPage out;
    out.kind = HtmlPage::Kind::Timeline;
    out.page = static_cast<int>(page);
    out.path = fmt::format("/profile/{}/timeline?page={}", profile_id, page);
    auto pages = page_count(p.posts.size(), page_size);
    if (page < 1 || page > pages)
        throw FixtureError(FixtureError::Kind::UnknownProfile, out.path);

    std::string& html = out.html;
    open_document(html, p, "Timeline", "timeline-page", page);
    html += "<div id=\"timeline\">\n";
    auto begin = (page - 1) * page_size;
    auto end = std::min(p.posts.size(), begin + page_size);
    for (auto i = begin; i < end; ++i) {
        const auto& post = p.posts[i];
        html += fmt::format("<article class=\"post\" data-post-type=\"{}\" data-post-index=\"{}\">\n",
                            to_string(post.type), i + 1);
        html += "<h3 class=\"post-title\">" + escape_html(post.title) + "</h3>\n";
        html += fmt::format("<div class=\"post-meta\"><span class=\"post-date\">{}</span> at "
                            "<span class=\"post-time\">{}</span></div>\n",
                            human_date(post.date), clock_time(post.minute_of_day));
        html += "<div class=\"post-content\"><p>" + escape_html(post.content) + "</p></div>\n";
        html += "<div class=\"post-tags\">";
        for (const auto& tag : post.tags) {
            std::string name = tag;
            if (auto t = network.index_of(tag))
                name = network.profile(*t).display_name;
            html += fmt::format("<a class=\"tag\" data-profile-id=\"{0}\" href=\"/profile/{0}\">{1}</a> ",
                                escape_html(tag), escape_html(name));
        }
        html += "</div>\n<div class=\"post-stats\">\n";
        html += "<span class=\"reactions-total\">" + format_count(post.reaction_total()) + "</span>\n";
        html += "<ul class=\"emotions\">";
        for (auto kind : kReactionKinds) {
            auto n = post.reactions.at(std::string(kind));
            if (n > 0)
                html += fmt::format("<li class=\"emotion\"><span class=\"kind\">{}</span> <span class=\"n\">{}</span></li>",
                                    kind, format_count(n));
        }
        html += "</ul>\n";
        html += fmt::format("<span class=\"comments\"><span class=\"n\">{}</span> comments</span>\n",
                            format_count(post.comment_count));
        html += fmt::format("<span class=\"shares\"><span class=\"n\">{}</span> shares</span>\n",
                            format_count(post.share_count));
        if (post.view_count)
            html += fmt::format("<span class=\"views\"><span class=\"n\">{}</span> views</span>\n",
                                format_count(*post.view_count));
        html += "</div>\n</article>\n";
    }
    html += "</div>\n";
    if (page < pages) {
        out.has_next = true;
        next_link(html, fmt::format("/profile/{}/timeline?page={}", profile_id, page + 1));
    }
    close_document(html);
    return out;
}

std::string render_login_wall()
{
    return "<!DOCTYPE html>\n<html lang=\"en\">\n<head><meta charset=\"utf-8\"><title>Log in</title></head>\n"
           "<body>\n<div id=\"login-wall\"><h1>You must log in to continue.</h1>\n"
           "<form method=\"post\" action=\"/login\"><input name=\"login\"> <input name=\"secret\" type=\"password\"> "
           "<button type=\"submit\">Log In</button></form></div>\n</body>\n</html>\n";
}

std::vector<HtmlPage> render_profile_pages(const FixtureNetwork& network, const std::string& profile_id,
                                           std::size_t page_size)
{
    if (page_size == 0)
        throw FixtureError(FixtureError::Kind::BadParameter, "page_size must be positive");
    const auto& p = network.profile(profile_id);
    std::vector<HtmlPage> pages;
    HtmlPage about;
    about.kind = HtmlPage::Kind::About;
    about.path = "/profile/" + profile_id + "/about";
    about.html = render_about(network, p);
    pages.push_back(std::move(about));

    auto friend_pages = page_count(network.neighbors(*network.index_of(profile_id)).size(), page_size);
    for (std::size_t k = 1; k <= friend_pages; ++k)
        pages.push_back(render_friends_page(network, profile_id, k, page_size));
    auto timeline_pages = page_count(p.posts.size(), page_size);
    for (std::size_t k = 1; k <= timeline_pages; ++k)
        pages.push_back(render_timeline_page(network, profile_id, k, page_size));
    return pages;
}

} // namespace imcrawler::fixture
