#include "imcrawler/dom/html.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

#include "imcrawler/util.hpp"

namespace imcrawler::dom {

namespace {

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

bool is_alpha(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char lower(char c)
{
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool in(std::string_view name, std::initializer_list<std::string_view> set)
{
    return std::find(set.begin(), set.end(), name) != set.end();
}

bool is_void(std::string_view name)
{
    return in(name, {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
                     "track", "wbr"});
}

bool is_raw_text(std::string_view name)
{
    return name == "script" || name == "style";
}

bool is_rcdata(std::string_view name)
{
    return name == "textarea" || name == "title";
}

bool closes_p(std::string_view name)
{
    return in(name, {"address", "article", "aside", "blockquote", "details", "div", "dl", "fieldset", "figcaption",
                     "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hgroup", "hr", "main",
                     "menu", "nav", "ol", "p", "pre", "section", "table", "ul", "li", "dd", "dt"});
}

bool is_heading(std::string_view name)
{
    return name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
}

const std::initializer_list<std::string_view> kScopeBoundary = {"html", "table", "td", "th", "caption", "marquee",
                                                                "object", "applet", "template", "button"};

void append_utf8(std::string& out, std::uint32_t cp)
{
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
        cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

const std::unordered_map<std::string_view, std::uint32_t>& named_entities()
{
    static const std::unordered_map<std::string_view, std::uint32_t> table = {
        {"amp", '&'},       {"lt", '<'},         {"gt", '>'},        {"quot", '"'},     {"apos", '\''},
        {"nbsp", ' '},      {"copy", 0xA9},      {"reg", 0xAE},      {"hellip", 0x2026}, {"mdash", 0x2014},
        {"ndash", 0x2013},  {"lsquo", 0x2018},   {"rsquo", 0x2019},  {"ldquo", 0x201C}, {"rdquo", 0x201D},
        {"middot", 0xB7},   {"bull", 0x2022},    {"euro", 0x20AC},   {"rupee", 0x20B9}, {"trade", 0x2122},
    };
    return table;
}

} // namespace

std::string decode_entities(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back('&');
            continue;
        }
        auto ref = s.substr(i + 1, semi - i - 1);
        bool decoded = false;
        if (!ref.empty() && ref[0] == '#') {
            std::uint32_t cp = 0;
            bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
            auto digits = ref.substr(hex ? 2 : 1);
            bool ok = !digits.empty();
            for (char c : digits) {
                int v = -1;
                if (c >= '0' && c <= '9')
                    v = c - '0';
                else if (hex && lower(c) >= 'a' && lower(c) <= 'f')
                    v = lower(c) - 'a' + 10;
                if (v < 0) {
                    ok = false;
                    break;
                }
                cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
                if (cp > 0x10FFFF)
                    cp = 0x110000;
            }
            if (ok) {
                append_utf8(out, cp);
                decoded = true;
            }
        } else {
            auto it = named_entities().find(ref);
            if (it != named_entities().end()) {
                append_utf8(out, it->second);
                decoded = true;
            }
        }
        if (decoded)
            i = semi;
        else
            out.push_back('&');
    }
    return out;
}

class TreeBuilder {
public:
    explicit TreeBuilder(DomTree& tree) : tree_(tree) { stack_.push_back(tree_.root()); }

    void text(std::string data)
    {
        if (data.empty())
            return;
        NodeId parent = stack_.back();
        auto& siblings = tree_.nodes_[parent].children;
        if (!siblings.empty() && siblings.back() == tree_.nodes_.size() - 1 &&
            tree_.nodes_[siblings.back()].kind == NodeKind::Text) {
            tree_.nodes_[siblings.back()].text += data;
            return;
        }
        Node n;
        n.kind = NodeKind::Text;
        n.text = std::move(data);
        append(std::move(n));
    }

    void start_tag(std::string name, std::vector<std::pair<std::string, std::string>> attrs)
    {
        if (name == "html" || name == "body" || name == "head") {
            if (open_index(name) != kNotOpen)
                return;
        }
        if (closes_p(name))
            close_in_scope("p", {});
        if (name == "li")
            close_in_scope("li", {"ul", "ol"});
        if (name == "dd" || name == "dt") {
            close_in_scope("dd", {"dl"});
            close_in_scope("dt", {"dl"});
        }
        if (name == "option" || name == "optgroup") {
            if (current_name() == "option")
                stack_.pop_back();
        }
        if (name == "tr")
            close_in_scope("tr", {"thead", "tbody", "tfoot"});
        if (name == "td" || name == "th") {
            close_in_scope("td", {"tr"});
            close_in_scope("th", {"tr"});
        }
        if (name == "thead" || name == "tbody" || name == "tfoot") {
            for (auto section : {"thead", "tbody", "tfoot"})
                close_in_scope(section, {});
        }
        if (is_heading(name) && is_heading(current_name()))
            stack_.pop_back();
        if (name == "a")
            close_in_scope("a", {});

        Node n;
        n.kind = NodeKind::Element;
        n.name = std::move(name);
        n.attributes = std::move(attrs);
        bool is_void_element = is_void(n.name);
        NodeId id = append(std::move(n));
        if (!is_void_element)
            stack_.push_back(id);
    }

    void end_tag(const std::string& name)
    {
        if (name == "br") {
            start_tag("br", {});
            return;
        }
        auto idx = open_index(name);
        if (idx == kNotOpen)
            return;
        stack_.resize(idx);
    }

    std::string_view current_name() const { return tree_.nodes_[stack_.back()].name; }

private:
    static constexpr std::size_t kNotOpen = SIZE_MAX;

    NodeId append(Node n)
    {
        NodeId parent = stack_.back();
        n.parent = parent;
        auto id = static_cast<NodeId>(tree_.nodes_.size());
        tree_.nodes_.push_back(std::move(n));
        tree_.nodes_[parent].children.push_back(id);
        return id;
    }

    // Stack position of the innermost open element named `name`, ignoring the document.
    std::size_t open_index(std::string_view name) const
    {
        for (std::size_t i = stack_.size(); i-- > 1;)
            if (tree_.nodes_[stack_[i]].name == name)
                return i;
        return kNotOpen;
    }

    void close_in_scope(std::string_view name, std::initializer_list<std::string_view> extra_boundary)
    {
        for (std::size_t i = stack_.size(); i-- > 1;) {
            const auto& n = tree_.nodes_[stack_[i]].name;
            if (n == name) {
                stack_.resize(i);
                return;
            }
            if (in(n, kScopeBoundary) || in(n, extra_boundary))
                return;
        }
    }

    DomTree& tree_;
    std::vector<NodeId> stack_;
};

namespace {

class Tokenizer {
public:
    Tokenizer(std::string_view src, TreeBuilder& builder) : src_(src), b_(builder) {}

    void run()
    {
        std::size_t text_start = 0;
        while (pos_ < src_.size()) {
            auto lt = src_.find('<', pos_);
            if (lt == std::string_view::npos) {
                pos_ = src_.size();
                break;
            }
            pos_ = lt;
            std::size_t before = pos_;
            if (!markup_at_cursor()) {
                ++pos_;
                continue;
            }
            b_.text(decode_entities(src_.substr(text_start, before - text_start)));
            consume_markup();
            text_start = pos_;
        }
        if (text_start < src_.size())
            b_.text(decode_entities(src_.substr(text_start)));
    }

private:
    bool markup_at_cursor() const
    {
        if (pos_ + 1 >= src_.size())
            return false;
        char c = src_[pos_ + 1];
        return is_alpha(c) || c == '/' || c == '!' || c == '?';
    }

    void consume_markup()
    {
        char c = src_[pos_ + 1];
        if (c == '!') {
            if (src_.substr(pos_, 4) == "<!--") {
                auto end = src_.find("-->", pos_ + 4);
                pos_ = end == std::string_view::npos ? src_.size() : end + 3;
            } else {
                skip_past('>');
            }
            return;
        }
        if (c == '?') {
            skip_past('>');
            return;
        }
        if (c == '/') {
            if (pos_ + 2 < src_.size() && is_alpha(src_[pos_ + 2])) {
                pos_ += 2;
                auto name = read_name();
                skip_past('>');
                b_.end_tag(name);
            } else {
                skip_past('>');
            }
            return;
        }
        ++pos_;
        auto name = read_name();
        std::vector<std::pair<std::string, std::string>> attrs;
        bool complete = read_attributes(attrs);
        if (!complete)
            return;  // EOF inside a tag: the partial tag is dropped
        b_.start_tag(name, std::move(attrs));
        if (is_raw_text(name) || is_rcdata(name))
            consume_raw_text(name);
    }

    std::string read_name()
    {
        std::string name;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (is_space(c) || c == '>' || c == '/')
                break;
            name.push_back(lower(c));
            ++pos_;
        }
        return name;
    }

    void skip_past(char c)
    {
        auto end = src_.find(c, pos_);
        pos_ = end == std::string_view::npos ? src_.size() : end + 1;
    }

    // Returns false when input ends before the closing '>'.
    bool read_attributes(std::vector<std::pair<std::string, std::string>>& attrs)
    {
        for (;;) {
            while (pos_ < src_.size() && (is_space(src_[pos_]) || src_[pos_] == '/'))
                ++pos_;
            if (pos_ >= src_.size())
                return false;
            if (src_[pos_] == '>') {
                ++pos_;
                return true;
            }
            std::string name;
            while (pos_ < src_.size()) {
                char c = src_[pos_];
                if (is_space(c) || c == '=' || c == '>' || c == '/')
                    break;
                name.push_back(lower(c));
                ++pos_;
            }
            if (name.empty()) {
                // A lone '=' or similar junk: skip one char.
                ++pos_;
                continue;
            }
            while (pos_ < src_.size() && is_space(src_[pos_]))
                ++pos_;
            std::string value;
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                while (pos_ < src_.size() && is_space(src_[pos_]))
                    ++pos_;
                if (pos_ >= src_.size())
                    return false;
                char q = src_[pos_];
                if (q == '"' || q == '\'') {
                    auto end = src_.find(q, pos_ + 1);
                    if (end == std::string_view::npos)
                        return false;
                    value = decode_entities(src_.substr(pos_ + 1, end - pos_ - 1));
                    pos_ = end + 1;
                } else {
                    std::size_t start = pos_;
                    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>')
                        ++pos_;
                    value = decode_entities(src_.substr(start, pos_ - start));
                }
            }
            auto dup = std::find_if(attrs.begin(), attrs.end(), [&](const auto& a) { return a.first == name; });
            if (dup == attrs.end())
                attrs.emplace_back(std::move(name), std::move(value));
        }
    }

    void consume_raw_text(const std::string& name)
    {
        // Find "</name" case-insensitively.
        std::size_t search = pos_;
        std::size_t end = src_.size();
        while (search < src_.size()) {
            auto lt = src_.find("</", search);
            if (lt == std::string_view::npos)
                break;
            bool match = lt + 2 + name.size() <= src_.size();
            for (std::size_t k = 0; match && k < name.size(); ++k)
                match = lower(src_[lt + 2 + k]) == name[k];
            if (match) {
                end = lt;
                break;
            }
            search = lt + 2;
        }
        auto body = src_.substr(pos_, end - pos_);
        b_.text(is_rcdata(name) ? decode_entities(body) : std::string(body));
        pos_ = end;
        if (end < src_.size()) {
            pos_ += 2 + name.size();
            skip_past('>');
        }
        b_.end_tag(name);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    TreeBuilder& b_;
};

} // namespace

DomTree::DomTree()
{
    Node doc;
    doc.kind = NodeKind::Document;
    nodes_.push_back(std::move(doc));
}

std::optional<std::string_view> DomTree::attribute(NodeId id, std::string_view name) const
{
    for (const auto& [k, v] : nodes_.at(id).attributes)
        if (k == name)
            return std::string_view(v);
    return std::nullopt;
}

bool DomTree::has_class(NodeId id, std::string_view cls) const
{
    auto attr = attribute(id, "class");
    if (!attr)
        return false;
    for (const auto& token : split(*attr, ' '))
        if (token == cls)
            return true;
    return false;
}

std::string DomTree::text_content(NodeId id) const
{
    std::string out;
    std::vector<NodeId> work = {id};
    while (!work.empty()) {
        NodeId cur = work.back();
        work.pop_back();
        const auto& n = nodes_[cur];
        if (n.kind == NodeKind::Text) {
            out += n.text;
            continue;
        }
        if (n.kind == NodeKind::Element && is_raw_text(n.name))
            continue;
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
            work.push_back(*it);
    }
    return out;
}

void DomTree::serialize(NodeId id, std::string& out) const
{
    const auto& n = nodes_[id];
    if (n.kind == NodeKind::Text) {
        const auto& parent = nodes_[n.parent];
        out += is_raw_text(parent.name) ? n.text : escape_html(n.text);
        return;
    }
    if (n.kind == NodeKind::Element) {
        out += '<';
        out += n.name;
        for (const auto& [k, v] : n.attributes) {
            out += ' ';
            out += k;
            out += "=\"";
            out += escape_html(v);
            out += '"';
        }
        out += '>';
        if (is_void(n.name))
            return;
    }
    for (auto child : n.children)
        serialize(child, out);
    if (n.kind == NodeKind::Element) {
        out += "</";
        out += n.name;
        out += '>';
    }
}

std::string DomTree::inner_html(NodeId id) const
{
    std::string out;
    for (auto child : nodes_.at(id).children)
        serialize(child, out);
    return out;
}

std::vector<NodeId> DomTree::descendants(NodeId id) const
{
    std::vector<NodeId> out;
    std::vector<NodeId> work(nodes_.at(id).children.rbegin(), nodes_.at(id).children.rend());
    while (!work.empty()) {
        NodeId cur = work.back();
        work.pop_back();
        out.push_back(cur);
        const auto& ch = nodes_[cur].children;
        for (auto it = ch.rbegin(); it != ch.rend(); ++it)
            work.push_back(*it);
    }
    return out;
}

bool DomTree::valid() const
{
    if (nodes_.empty() || nodes_[0].kind != NodeKind::Document || nodes_[0].parent != kNoNode)
        return false;
    std::vector<int> seen(nodes_.size(), 0);
    for (NodeId i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.kind == NodeKind::Text && !n.children.empty())
            return false;
        NodeId prev = i;
        for (auto c : n.children) {
            if (c >= nodes_.size() || c <= prev || nodes_[c].parent != i)
                return false;
            ++seen[c];
            prev = c;
        }
    }
    for (NodeId i = 1; i < nodes_.size(); ++i)
        if (seen[i] != 1)
            return false;
    return true;
}

DomTree parse_dom(std::string_view html)
{
    DomTree tree;
    TreeBuilder builder(tree);
    Tokenizer(html, builder).run();
    return tree;
}

std::string strip_markup(std::string_view html)
{
    auto tree = parse_dom(html);
    return collapse_whitespace(tree.text_content(tree.root()));
}

} // namespace imcrawler::dom
