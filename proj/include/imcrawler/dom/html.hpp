#pragma once

// Tolerant HTML parser producing a DOM tree.
//
// The parser never fails: unclosed tags, stray end tags and truncated input
// are repaired the way browsers do for the common cases (implied </p>,
// </li>, </td>, ...). Nodes are stored in document (pre-)order, so a
// smaller NodeId always precedes a larger one in the source.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace imcrawler::dom {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = UINT32_MAX;

enum class NodeKind { Document, Element, Text };

struct Node {
    NodeKind kind = NodeKind::Element;
    std::string name;  // lower-case tag name; empty for text and document
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;  // decoded character data for text nodes
    NodeId parent = kNoNode;
    std::vector<NodeId> children;
};

class DomTree {
public:
    DomTree();

    NodeId root() const noexcept { return 0; }
    std::size_t size() const noexcept { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_.at(id); }

    std::optional<std::string_view> attribute(NodeId id, std::string_view name) const;
    bool has_class(NodeId id, std::string_view cls) const;

    // Concatenated descendant text, skipping <script> and <style>.
    std::string text_content(NodeId id) const;
    // Serialized markup of the children of `id`.
    std::string inner_html(NodeId id) const;

    // Descendants of `id` (excluding itself) in document order.
    std::vector<NodeId> descendants(NodeId id) const;

    // Checks the tree invariants: single parent, parent/child links agree,
    // children in increasing document order.
    bool valid() const;

private:
    friend class TreeBuilder;
    void serialize(NodeId id, std::string& out) const;

    std::vector<Node> nodes_;
};

DomTree parse_dom(std::string_view html);

// Decodes character references (&amp; &#39; &#x27; ...). Unknown
// references are left as-is.
std::string decode_entities(std::string_view s);

// Removes tags, decodes entities and collapses whitespace.
std::string strip_markup(std::string_view html);

} // namespace imcrawler::dom
