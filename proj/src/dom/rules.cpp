#include "imcrawler/dom/rules.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "imcrawler/util.hpp"

namespace imcrawler::dom {

const std::string_view kDefaultRulesText = R"(# Extraction rules for the fixture page templates.
# name | steps | one|many | text|html|attr:NAME

# About page
profile.id             | div[id=page] | one | attr:data-profile-id
profile.friend_count   | div[id=friend-count]>span[class~=count] | one | html
profile.gender         | section[id=basic-information]>li[data-field=gender]>span[class~=value] | one | html
profile.birthday       | section[id=basic-information]>li[data-field=birthday]>span[class~=value] | one | html
profile.email          | section[id=basic-information]>li[data-field=email]>span[class~=value] | one | html
profile.phone          | section[id=basic-information]>li[data-field=phone]>span[class~=value] | one | html
profile.hometown       | section[id=places-lived]>li[data-field=hometown]>span[class~=value] | one | html
profile.current_city   | section[id=places-lived]>li[data-field=current-city]>span[class~=value] | one | html
profile.relationship   | section[id=family-and-relationship]>div[data-field=relationship]>span[class~=value] | one | html
profile.family_list    | section[id=family-and-relationship]>ul[class~=family] | one | attr:class
profile.family_members | section[id=family-and-relationship]>ul[class~=family]>li[class~=family-member] | many | attr:data-profile-id
profile.pages_section  | section[id=pages-liked] | one | attr:id
profile.pages_liked    | section[id=pages-liked]>li[class~=page] | many | html
profile.groups_section | section[id=groups-joined] | one | attr:id
profile.groups_joined  | section[id=groups-joined]>li[class~=group] | many | html
profile.page_end       | footer[id=page-end] | one | attr:data-complete

# Friends pages
friends.link           | ul[id=friend-list]>li[class~=friend]>a[class~=friend-link] | many | attr:href
friends.next           | a[id=next-page] | one | attr:href

# Timeline pages; post.* rules are evaluated inside each timeline.post node
timeline.post          | div[id=timeline]>article[class~=post] | many | attr:data-post-type
timeline.next          | a[id=next-page] | one | attr:href
post.title             | h3[class~=post-title] | one | html
post.content           | div[class~=post-content] | one | html
post.date              | span[class~=post-date] | one | text
post.time              | span[class~=post-time] | one | text
post.tags              | div[class~=post-tags]>a[class~=tag] | many | attr:data-profile-id
post.reactions         | span[class~=reactions-total] | one | text
post.emotions          | ul[class~=emotions]>li[class~=emotion] | many | html
post.comments          | span[class~=comments] | one | html
post.shares            | span[class~=shares] | one | html
post.views             | span[class~=views] | one | html
)";

namespace {

const char* kind_code(RuleError::Kind k)
{
    switch (k) {
    case RuleError::Kind::BadRule: return "BadRule";
    case RuleError::Kind::MissingRule: return "MissingRule";
    case RuleError::Kind::MultiplicityViolation: return "MultiplicityViolation";
    }
    return "RuleError";
}

SelectorStep parse_step(std::string_view text, std::size_t line_no)
{
    auto fail = [&] { return RuleError(RuleError::Kind::BadRule, std::string(text), line_no); };
    text = trim(text);
    if (text.empty())
        throw fail();
    SelectorStep step;
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] != '[' && text[pos] != ':')
        ++pos;
    auto tag = trim(text.substr(0, pos));
    if (tag != "*")
        step.tag = to_lower(tag);
    while (pos < text.size() && text[pos] == '[') {
        auto close = text.find(']', pos);
        if (close == std::string_view::npos)
            throw fail();
        auto body = text.substr(pos + 1, close - pos - 1);
        auto eq = body.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw fail();
        AttributeTest test;
        auto name = body.substr(0, eq);
        if (name.back() == '~') {
            test.token = true;
            name.remove_suffix(1);
        }
        test.name = to_lower(trim(name));
        auto value = trim(body.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        test.value = std::string(value);
        if (test.name.empty())
            throw fail();
        step.attributes.push_back(std::move(test));
        pos = close + 1;
    }
    if (pos < text.size()) {
        if (text[pos] != ':')
            throw fail();
        auto n = parse_int(text.substr(pos + 1));
        if (!n || *n < 1)
            throw fail();
        step.index = static_cast<std::size_t>(*n);
    }
    if (step.tag.empty() && step.attributes.empty() && tag != "*")
        throw fail();
    return step;
}

bool matches(const DomTree& dom, NodeId id, const SelectorStep& step)
{
    const auto& n = dom.node(id);
    if (n.kind != NodeKind::Element)
        return false;
    if (!step.tag.empty() && n.name != step.tag)
        return false;
    for (const auto& test : step.attributes) {
        if (test.token) {
            auto attr = dom.attribute(id, test.name);
            if (!attr)
                return false;
            auto tokens = split(collapse_whitespace(*attr), ' ');
            if (std::find(tokens.begin(), tokens.end(), test.value) == tokens.end())
                return false;
        } else {
            auto attr = dom.attribute(id, test.name);
            if (!attr || *attr != test.value)
                return false;
        }
    }
    return true;
}

} // namespace

RuleError::RuleError(Kind kind, const std::string& detail, std::size_t line_no)
    : Error(kind == Kind::MultiplicityViolation ? ErrorCategory::Parse : ErrorCategory::Config, kind_code(kind),
            line_no ? fmt::format("{} (line {}): {}", kind_code(kind), line_no, detail)
                    : fmt::format("{}: {}", kind_code(kind), detail)),
      kind_(kind), line_no_(line_no)
{
}

ExtractionRule parse_rule(std::string_view line, std::size_t line_no)
{
    auto parts = split(line, '|');
    if (parts.size() != 4)
        throw RuleError(RuleError::Kind::BadRule, std::string(line), line_no);
    ExtractionRule rule;
    rule.name = std::string(trim(parts[0]));
    if (rule.name.empty())
        throw RuleError(RuleError::Kind::BadRule, std::string(line), line_no);
    for (const auto& s : split(trim(parts[1]), '>'))
        rule.steps.push_back(parse_step(s, line_no));

    auto mult = trim(parts[2]);
    if (mult == "one")
        rule.multiplicity = Multiplicity::One;
    else if (mult == "many")
        rule.multiplicity = Multiplicity::Many;
    else
        throw RuleError(RuleError::Kind::BadRule, std::string(line), line_no);

    auto cap = trim(parts[3]);
    if (cap == "text") {
        rule.capture.kind = Capture::Kind::Text;
    } else if (cap == "html") {
        rule.capture.kind = Capture::Kind::Html;
    } else if (cap.substr(0, 5) == "attr:" && cap.size() > 5) {
        rule.capture.kind = Capture::Kind::Attribute;
        rule.capture.attribute = to_lower(cap.substr(5));
    } else {
        throw RuleError(RuleError::Kind::BadRule, std::string(line), line_no);
    }
    return rule;
}

std::string format_rule(const ExtractionRule& rule)
{
    std::vector<std::string> steps;
    for (const auto& s : rule.steps) {
        std::string out = s.tag.empty() ? "*" : s.tag;
        for (const auto& a : s.attributes)
            out += fmt::format("[{}{}={}]", a.name, a.token ? "~" : "", a.value);
        if (s.index)
            out += fmt::format(":{}", *s.index);
        steps.push_back(std::move(out));
    }
    std::string capture = rule.capture.kind == Capture::Kind::Text   ? "text"
                          : rule.capture.kind == Capture::Kind::Html ? "html"
                                                                     : "attr:" + rule.capture.attribute;
    return fmt::format("{} | {} | {} | {}", rule.name, join(steps, ">"),
                       rule.multiplicity == Multiplicity::One ? "one" : "many", capture);
}

RuleSet RuleSet::parse(std::string_view text)
{
    RuleSet set;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        set.add(parse_rule(line, line_no));
    }
    return set;
}

RuleSet RuleSet::load(const std::filesystem::path& path)
{
    try {
        return parse(read_text_file(path));
    } catch (const Error& e) {
        if (e.code() == "MissingFile")
            throw RuleError(RuleError::Kind::BadRule, "cannot open rules file " + path.string());
        throw;
    }
}

const RuleSet& RuleSet::defaults()
{
    static const RuleSet set = parse(kDefaultRulesText);
    return set;
}

void RuleSet::add(ExtractionRule rule)
{
    if (rule.steps.empty())
        throw RuleError(RuleError::Kind::BadRule, rule.name);
    auto name = rule.name;
    if (!rules_.count(name))
        order_.push_back(name);
    rules_[name] = std::move(rule);
}

const ExtractionRule& RuleSet::get(std::string_view name) const
{
    auto it = rules_.find(name);
    if (it == rules_.end())
        throw RuleError(RuleError::Kind::MissingRule, std::string(name));
    return it->second;
}

std::string RuleSet::dump() const
{
    std::string out;
    for (const auto& name : order_)
        out += format_rule(rules_.at(name)) + "\n";
    return out;
}

std::string capture_node(const DomTree& dom, NodeId id, const Capture& capture)
{
    switch (capture.kind) {
    case Capture::Kind::Text: return collapse_whitespace(dom.text_content(id));
    case Capture::Kind::Html: return dom.inner_html(id);
    case Capture::Kind::Attribute: return std::string(dom.attribute(id, capture.attribute).value_or(""));
    }
    return {};
}

std::vector<NodeId> select(const DomTree& dom, const std::vector<SelectorStep>& steps, NodeId context)
{
    std::vector<NodeId> current = {context};
    for (const auto& step : steps) {
        std::vector<NodeId> next;
        for (auto ctx : current) {
            std::size_t seen = 0;
            for (auto id : dom.descendants(ctx)) {
                if (!matches(dom, id, step))
                    continue;
                ++seen;
                if (!step.index || *step.index == seen)
                    next.push_back(id);
                if (step.index && seen == *step.index)
                    break;
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        current = std::move(next);
        if (current.empty())
            break;
    }
    return current;
}

std::vector<NodeId> match_rule(const DomTree& dom, const ExtractionRule& rule, NodeId context)
{
    auto nodes = select(dom, rule.steps, context);
    if (rule.multiplicity == Multiplicity::One && nodes.size() > 1)
        throw RuleError(RuleError::Kind::MultiplicityViolation,
                        fmt::format("rule '{}' matched {} nodes", rule.name, nodes.size()));
    return nodes;
}

std::vector<std::string> apply_rule(const DomTree& dom, const ExtractionRule& rule, NodeId context)
{
    std::vector<std::string> out;
    for (auto id : match_rule(dom, rule, context))
        out.push_back(capture_node(dom, id, rule.capture));
    return out;
}

} // namespace imcrawler::dom
