#include "imcrawler/config_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "imcrawler/csv.hpp"
#include "imcrawler/url.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler {

namespace {

std::string describe(ConfigError::Kind kind, const std::string& detail, std::size_t line_no)
{
    using K = ConfigError::Kind;
    switch (kind) {
    case K::MissingFile: return "missing file: " + detail;
    case K::MalformedLine: return fmt::format("malformed line {}: {}", line_no, detail);
    case K::DuplicateSeed: return "duplicate seed profile: " + detail;
    case K::UnknownKey: return "unknown configuration key: " + detail;
    case K::BadValue: return "bad value for key: " + detail;
    case K::InconsistentPair: return "seedProfile and reextractLinksFile must be given together";
    case K::BadUrl: return fmt::format("bad url on line {}: {}", line_no, detail);
    case K::WriteFailure: return "cannot write: " + detail;
    }
    return detail;
}

const char* kind_code(ConfigError::Kind kind)
{
    using K = ConfigError::Kind;
    switch (kind) {
    case K::MissingFile: return "MissingFile";
    case K::MalformedLine: return "MalformedLine";
    case K::DuplicateSeed: return "DuplicateSeed";
    case K::UnknownKey: return "UnknownKey";
    case K::BadValue: return "BadValue";
    case K::InconsistentPair: return "InconsistentPair";
    case K::BadUrl: return "BadUrl";
    case K::WriteFailure: return "WriteFailure";
    }
    return "ConfigError";
}

std::ifstream open_or_throw(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(ConfigError::Kind::MissingFile, path.string());
    return in;
}

bool skippable(std::string_view line)
{
    auto t = trim(line);
    return t.empty() || t.front() == '#';
}

std::string strip_cr(std::string line)
{
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return line;
}

} // namespace

ConfigError::ConfigError(Kind kind, std::string detail, std::size_t line_no)
    : Error(ErrorCategory::Config, kind_code(kind), describe(kind, detail, line_no)), kind_(kind),
      detail_(std::move(detail)), line_no_(line_no)
{
}

std::vector<SeedProfile> parse_seed_file(const fs::path& path)
{
    auto in = open_or_throw(path);
    std::vector<SeedProfile> seeds;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(std::move(line));
        if (skippable(line))
            continue;
        std::istringstream ls(line + "\n");
        csv::Reader reader(ls);
        csv::Row row;
        reader.next(row);
        if (row.size() < 3)
            throw ConfigError(ConfigError::Kind::MalformedLine, line, line_no);
        SeedProfile seed{std::string(trim(row[0])), std::string(trim(row[1])), std::string(trim(row[2])), {}};
        if (seed.profile_id.empty() || seed.login_name.empty() || seed.secret.empty())
            throw ConfigError(ConfigError::Kind::MalformedLine, line, line_no);
        if (!ids.insert(seed.profile_id).second)
            throw ConfigError(ConfigError::Kind::DuplicateSeed, seed.profile_id, line_no);
        seeds.push_back(std::move(seed));
    }
    return seeds;
}

void write_seed_file(const fs::path& path, const std::vector<SeedProfile>& seeds)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError(ConfigError::Kind::WriteFailure, path.string());
    out << "# profile_id,login,secret\n";
    for (const auto& s : seeds)
        out << csv::format_row({s.profile_id, s.login_name, s.secret});
}

CrawlConfig parse_config(const fs::path& path)
{
    auto in = open_or_throw(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto dir = fs::absolute(path).parent_path();
    return parse_config_text(ss.str(), dir);
}

CrawlConfig parse_config_text(const std::string& text, const fs::path& base_dir)
{
    using K = ConfigError::Kind;
    std::map<std::string, std::string> values;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(std::move(line));
        if (skippable(line))
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(K::MalformedLine, line, line_no);
        std::string key(trim(std::string_view(line).substr(0, eq)));
        std::string value(trim(std::string_view(line).substr(eq + 1)));
        if (key == "friendLinksFile")
            key = "friendLinks";
        values[key] = value;
    }

    auto resolve = [&](const std::string& key) -> fs::path {
        const auto& v = values.at(key);
        if (v.empty())
            throw ConfigError(K::BadValue, key);
        fs::path p(v);
        if (p.is_relative())
            p = base_dir / p;
        return fs::absolute(p).lexically_normal();
    };
    auto number = [&](const std::string& key, std::int64_t min) -> std::int64_t {
        auto n = parse_int(values.at(key));
        if (!n || *n < min)
            throw ConfigError(K::BadValue, key);
        return *n;
    };

    CrawlConfig cfg;
    static const std::vector<std::string> known = {"friendLinks", "outputFile", "totalPost", "reextractLinksFile",
                                                   "seedProfile", "depth",      "agents",    "sessionsPerAgent",
                                                   "minDelayMs",  "maxDelayMs"};
    for (const auto& [key, _] : values)
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(K::UnknownKey, key);

    for (const char* required : {"friendLinks", "outputFile", "totalPost"})
        if (!values.count(required))
            throw ConfigError(K::BadValue, required);

    cfg.friend_links_path = resolve("friendLinks");
    cfg.output_path = resolve("outputFile");
    cfg.total_post = number("totalPost", 1);
    if (values.count("reextractLinksFile"))
        cfg.reextract_links_path = resolve("reextractLinksFile");
    if (values.count("seedProfile"))
        cfg.seed_profile_index = number("seedProfile", 1);
    if (values.count("depth"))
        cfg.depth = number("depth", 1);
    if (values.count("agents"))
        cfg.agents = number("agents", 1);
    if (values.count("sessionsPerAgent"))
        cfg.sessions_per_agent = number("sessionsPerAgent", 1);
    if (values.count("minDelayMs"))
        cfg.min_delay_ms = number("minDelayMs", 0);
    if (values.count("maxDelayMs"))
        cfg.max_delay_ms = number("maxDelayMs", 0);
    if (cfg.min_delay_ms > cfg.max_delay_ms)
        throw ConfigError(K::BadValue, "minDelayMs");
    if (cfg.seed_profile_index.has_value() != cfg.reextract_links_path.has_value())
        throw ConfigError(K::InconsistentPair, "seedProfile");
    return cfg;
}

std::string dump_config(const CrawlConfig& c)
{
    std::string out;
    out += "friendLinks=" + c.friend_links_path.string() + "\n";
    out += "outputFile=" + c.output_path.string() + "\n";
    out += fmt::format("totalPost={}\n", c.total_post);
    if (c.reextract_links_path)
        out += "reextractLinksFile=" + c.reextract_links_path->string() + "\n";
    if (c.seed_profile_index)
        out += fmt::format("seedProfile={}\n", *c.seed_profile_index);
    out += fmt::format("depth={}\nagents={}\nsessionsPerAgent={}\nminDelayMs={}\nmaxDelayMs={}\n", c.depth, c.agents,
                       c.sessions_per_agent, c.min_delay_ms, c.max_delay_ms);
    return out;
}

void validate_against_seeds(const CrawlConfig& config, const std::vector<SeedProfile>& seeds)
{
    if (config.seed_profile_index && *config.seed_profile_index > static_cast<std::int64_t>(seeds.size()))
        throw ConfigError(ConfigError::Kind::BadValue, "seedProfile");
}

LinkList read_links_file(const fs::path& path)
{
    auto in = open_or_throw(path);
    LinkList list;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(std::move(line));
        if (trim(line).empty())
            continue;
        auto url = normalize_profile_url(line);
        if (!url)
            throw ConfigError(ConfigError::Kind::BadUrl, line, line_no);
        if (seen.insert(*url).second)
            list.urls.push_back(std::move(*url));
    }
    return list;
}

void write_links_file(const fs::path& path, const LinkList& links)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError(ConfigError::Kind::WriteFailure, path.string());
    for (const auto& u : links.urls)
        out << u << '\n';
    if (!out)
        throw ConfigError(ConfigError::Kind::WriteFailure, path.string());
}

void append_unique(LinkList& list, const std::string& url)
{
    if (std::find(list.urls.begin(), list.urls.end(), url) == list.urls.end())
        list.urls.push_back(url);
}

} // namespace imcrawler
