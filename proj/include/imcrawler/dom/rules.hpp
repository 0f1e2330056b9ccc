#pragma once

// Declarative extraction rules evaluated against a DomTree.
//
// Rules file format, one rule per line (`#` starts a comment):
//
//     name | step>step>step | one|many | text|html|attr:NAME
//
// A step is `tag`, `*`, or either followed by `[attr=value]` (exact) or
// `[attr~=value]` (whitespace-separated token) tests, plus an optional
// `:N` picking the N-th match (1-based). `>` means "descendant of", so the
// rule keeps working when a template wraps nodes in extra containers.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imcrawler/dom/html.hpp"
#include "imcrawler/error.hpp"

namespace imcrawler::dom {

class RuleError : public Error {
public:
    enum class Kind { BadRule, MissingRule, MultiplicityViolation };
    RuleError(Kind kind, const std::string& detail, std::size_t line_no = 0);
    Kind kind() const noexcept { return kind_; }
    std::size_t line_no() const noexcept { return line_no_; }

private:
    Kind kind_;
    std::size_t line_no_;
};

struct AttributeTest {
    std::string name;
    std::string value;
    bool token = false;  // ~= match

    bool operator==(const AttributeTest&) const = default;
};

struct SelectorStep {
    std::string tag;  // empty matches any element
    std::vector<AttributeTest> attributes;
    std::optional<std::size_t> index;  // 1-based

    bool operator==(const SelectorStep&) const = default;
};

enum class Multiplicity { One, Many };

struct Capture {
    enum class Kind { Text, Html, Attribute };
    Kind kind = Kind::Text;
    std::string attribute;

    bool operator==(const Capture&) const = default;
};

struct ExtractionRule {
    std::string name;
    std::vector<SelectorStep> steps;
    Multiplicity multiplicity = Multiplicity::Many;
    Capture capture;

    bool operator==(const ExtractionRule&) const = default;
};

ExtractionRule parse_rule(std::string_view line, std::size_t line_no = 0);
std::string format_rule(const ExtractionRule& rule);

class RuleSet {
public:
    RuleSet() = default;

    static RuleSet parse(std::string_view text);
    static RuleSet load(const std::filesystem::path& path);
    // Rules matching the bundled fixture templates (rules/fixture.rules).
    static const RuleSet& defaults();

    void add(ExtractionRule rule);
    const ExtractionRule& get(std::string_view name) const;
    bool contains(std::string_view name) const { return rules_.count(std::string(name)) > 0; }
    std::size_t size() const noexcept { return rules_.size(); }
    std::string dump() const;

private:
    std::map<std::string, ExtractionRule, std::less<>> rules_;
    std::vector<std::string> order_;
};

extern const std::string_view kDefaultRulesText;

std::string capture_node(const DomTree& dom, NodeId id, const Capture& capture);

// Matching nodes in document order, searching below `context`.
std::vector<NodeId> select(const DomTree& dom, const std::vector<SelectorStep>& steps, NodeId context);

// Captured strings in document order. Throws MultiplicityViolation when a
// `one` rule matches two or more nodes.
std::vector<std::string> apply_rule(const DomTree& dom, const ExtractionRule& rule, NodeId context = 0);
std::vector<NodeId> match_rule(const DomTree& dom, const ExtractionRule& rule, NodeId context = 0);

} // namespace imcrawler::dom
