#include "imcrawler/url.hpp"

#include "imcrawler/util.hpp"

namespace imcrawler {

std::string Url::origin() const
{
    std::string out = scheme + "://" + host;
    if (port)
        out += ":" + std::to_string(port);
    return out;
}

std::string Url::str() const
{
    std::string out = origin() + path;
    if (!query.empty())
        out += "?" + query;
    return out;
}

std::optional<Url> parse_url(std::string_view text)
{
    text = trim(text);
    auto scheme_end = text.find("://");
    if (scheme_end == std::string_view::npos)
        return std::nullopt;
    Url url;
    url.scheme = to_lower(text.substr(0, scheme_end));
    if (url.scheme != "http" && url.scheme != "https")
        return std::nullopt;
    text.remove_prefix(scheme_end + 3);

    auto frag = text.find('#');
    if (frag != std::string_view::npos)
        text = text.substr(0, frag);

    auto authority_end = text.find_first_of("/?");
    std::string_view authority = text.substr(0, authority_end);
    std::string_view rest = authority_end == std::string_view::npos ? std::string_view{} : text.substr(authority_end);
    if (authority.empty() || authority.find_first_of(" \t@") != std::string_view::npos)
        return std::nullopt;

    auto colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
        auto port = parse_int(authority.substr(colon + 1));
        if (!port || *port <= 0 || *port > 65535)
            return std::nullopt;
        url.port = static_cast<int>(*port);
        authority = authority.substr(0, colon);
    }
    if (authority.empty())
        return std::nullopt;
    url.host = to_lower(authority);

    auto q = rest.find('?');
    url.path = std::string(rest.substr(0, q));
    if (q != std::string_view::npos)
        url.query = std::string(rest.substr(q + 1));
    if (url.path.empty())
        url.path = "/";
    if (url.path.find_first_of(" \t\r\n") != std::string::npos)
        return std::nullopt;
    return url;
}

std::optional<Url> resolve_href(const Url& base, std::string_view href)
{
    href = trim(href);
    if (href.empty())
        return std::nullopt;
    if (href.find("://") != std::string_view::npos)
        return parse_url(href);
    if (href.front() != '/')
        return std::nullopt;
    return parse_url(base.origin() + std::string(href));
}

std::optional<std::string> normalize_profile_url(std::string_view text)
{
    auto url = parse_url(text);
    if (!url)
        return std::nullopt;
    while (url->path.size() > 1 && url->path.back() == '/')
        url->path.pop_back();
    if (url->path == "/")
        return std::nullopt;
    url->query.clear();
    return url->str();
}

std::optional<std::string> profile_id_from_url(std::string_view text)
{
    auto norm = normalize_profile_url(text);
    if (!norm)
        return std::nullopt;
    auto slash = norm->rfind('/');
    return norm->substr(slash + 1);
}

} // namespace imcrawler
