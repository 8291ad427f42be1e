// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/transforms/transforms.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <type_traits>
#include <unordered_set>

#include <fmt/format.h>

#include "codecorpus/common/rng.hpp"
#include "syntax/lexer.hpp"

namespace codecorpus::transforms {

using syntax::NodeKind;
namespace fld = syntax::fld;

std::string_view category_name(IdentifierCategory category) {
    switch (category) {
        case IdentifierCategory::Variable: return "variable";
        case IdentifierCategory::Function: return "function";
        case IdentifierCategory::ClassDefinition: return "class-definition";
        case IdentifierCategory::Argument: return "argument";
        case IdentifierCategory::Attribute: return "attribute";
        case IdentifierCategory::ImportName: return "import-name";
    }
    return "?";
}

namespace {

// A site where "_" would not re-parse: `case [x] as _`, `case {**_}`, and
// the leading name of `case _.x:` or `case _(...):`.
constexpr bool kCaptureTarget = true;

// Walks identifier sites in source order, handing each one to
// fn(node, text, category, capture_target). With a non-const Node the
// callback may overwrite `text`; dotted import paths are split into
// components and joined again afterwards.
template <typename Node, typename Fn>
class SiteWalker {
    static constexpr bool kMutable = !std::is_const_v<Node>;
    using Text = std::conditional_t<kMutable, std::string, const std::string>;

public:
    explicit SiteWalker(Fn& fn) : fn_(fn) {}

    void walk(Node& n) {
        switch (n.kind) {
            case NodeKind::Absent:
                return;
            case NodeKind::FunctionDef:
            case NodeKind::AsyncFunctionDef:
                each(n.field(fld::fn_decorators));
                site(n, n.name, IdentifierCategory::Function);
                each(n.field(fld::fn_args));
                each(n.field(fld::fn_returns));
                each(n.field(fld::fn_body));
                return;
            case NodeKind::ClassDef:
                each(n.field(fld::cls_decorators));
                site(n, n.name, IdentifierCategory::ClassDefinition);
                merged(n.field(fld::cls_bases), n.field(fld::cls_keywords));
                each(n.field(fld::cls_body));
                return;
            case NodeKind::Call:
                each(n.field(fld::call_func));
                merged(n.field(fld::call_args), n.field(fld::call_keywords));
                return;
            case NodeKind::arguments: {
                std::vector<Node*> kids;
                for (auto& f : n.fields)
                    for (auto& c : f)
                        if (c.kind != NodeKind::Absent) kids.push_back(&c);
                in_span_order(kids);
                return;
            }
            case NodeKind::IfExp:
                each(n.field(fld::cond_body));
                each(n.field(fld::test));
                each(n.field(fld::cond_orelse));
                return;
            case NodeKind::Dict:
                interleave(n.field(fld::dict_keys), n.field(fld::dict_values));
                return;
            case NodeKind::Name:
                site(n, n.name, IdentifierCategory::Variable, in_pattern_name_);
                return;
            case NodeKind::MatchValue:
                pattern_names(n.field(fld::value));
                return;
            case NodeKind::arg:
                site(n, n.name, IdentifierCategory::Argument);
                each(n.field(fld::annotation));
                return;
            case NodeKind::keyword:
                site(n, n.name, IdentifierCategory::Argument);
                each(n.field(fld::value));
                return;
            case NodeKind::Attribute:
                each(n.field(fld::value));
                site(n, n.name, IdentifierCategory::Attribute);
                return;
            case NodeKind::alias:
                if (n.name != "*") dotted(n, n.name);
                site(n, n.asname, IdentifierCategory::ImportName);
                return;
            case NodeKind::ImportFrom:
                dotted(n, n.name);
                each(n.field(fld::import_names));
                return;
            case NodeKind::Global:
            case NodeKind::Nonlocal:
                for (auto& name : n.names) site(n, name, IdentifierCategory::Variable);
                return;
            case NodeKind::ExceptHandler:
                each(n.field(fld::handler_type));
                site(n, n.name, IdentifierCategory::Variable);
                each(n.field(fld::handler_body));
                return;
            case NodeKind::MatchAs: {
                bool has_pattern = !n.field(fld::as_pattern).empty();
                each(n.field(fld::as_pattern));
                site(n, n.name, IdentifierCategory::Variable, has_pattern);
                return;
            }
            case NodeKind::MatchStar:
                site(n, n.name, IdentifierCategory::Variable);
                return;
            case NodeKind::MatchMapping:
                interleave(n.field(fld::map_keys), n.field(fld::map_patterns));
                site(n, n.name, IdentifierCategory::Variable, kCaptureTarget);
                return;
            case NodeKind::MatchClass: {
                pattern_names(n.field(fld::class_cls));
                each(n.field(fld::class_patterns));
                auto& kwd = n.field(fld::class_kwd_patterns);
                for (std::size_t i = 0; i < n.names.size(); ++i) {
                    site(n, n.names[i], IdentifierCategory::Attribute);
                    if (i < kwd.size()) walk(kwd[i]);
                }
                return;
            }
            default:
                for (auto& f : n.fields) each(f);
                return;
        }
    }

private:
    template <typename Vec>
    void pattern_names(Vec& nodes) {
        in_pattern_name_ = true;
        each(nodes);
        in_pattern_name_ = false;
    }

    template <typename Vec>
    void each(Vec& nodes) {
        for (auto& c : nodes) walk(c);
    }

    template <typename Vec>
    void interleave(Vec& a, Vec& b) {
        for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
            if (i < a.size()) walk(a[i]);
            if (i < b.size()) walk(b[i]);
        }
    }

    // Positional and keyword arguments can alternate (`f(a=1, *b)`), so the
    // two lists are visited in span order.
    template <typename Vec>
    void merged(Vec& a, Vec& b) {
        std::vector<Node*> kids;
        for (auto& c : a) kids.push_back(&c);
        for (auto& c : b) kids.push_back(&c);
        in_span_order(kids);
    }

    void in_span_order(std::vector<Node*>& kids) {
        std::stable_sort(kids.begin(), kids.end(),
                         [](const Node* x, const Node* y) { return x->span.begin < y->span.begin; });
        for (Node* c : kids) walk(*c);
    }

    void site(Node& n, Text& text, IdentifierCategory category, bool capture = false) {
        if (!text.empty()) fn_(n, text, category, capture);
    }

    void dotted(Node& n, Text& text) {
        if (text.find('.') == std::string::npos) {
            site(n, text, IdentifierCategory::ImportName);
            return;
        }
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            std::size_t dot = text.find('.', start);
            parts.push_back(text.substr(start, dot - start));
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        for (std::string& part : parts) {
            if constexpr (kMutable) {
                fn_(n, part, IdentifierCategory::ImportName, false);
            } else {
                const std::string& view = part;
                fn_(n, view, IdentifierCategory::ImportName, false);
            }
        }
        if constexpr (kMutable) {
            std::string joined = parts.front();
            for (std::size_t i = 1; i < parts.size(); ++i) joined += "." + parts[i];
            text = std::move(joined);
        }
    }

    Fn& fn_;
    bool in_pattern_name_ = false;
};

template <typename Node, typename Fn>
void walk_sites(Node& root, Fn fn) {
    SiteWalker<Node, Fn> walker(fn);
    walker.walk(root);
}

// Distinct identifier names in order of first appearance.
std::vector<std::string> distinct_names(const SyntaxNode& root) {
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    walk_sites(root, [&](const SyntaxNode&, const std::string& text, IdentifierCategory, bool) {
        if (seen.insert(text).second) names.push_back(text);
    });
    return names;
}

bool is_docstring_like(const SyntaxNode& stmt) {
    if (stmt.kind != NodeKind::Expr) return false;
    const SyntaxNode& value = stmt.field(fld::value).front();
    return value.kind == NodeKind::Constant && value.value.type == syntax::ConstantValue::Type::Str;
}

void strip_in_place(SyntaxNode& node) {
    for (auto& field : node.fields) {
        for (auto& child : field) strip_in_place(child);

        bool statements = std::any_of(field.begin(), field.end(),
                                      [](const SyntaxNode& c) { return syntax::is_statement(c.kind); });
        if (!statements) continue;
        auto first_removed = std::find_if(field.begin(), field.end(), is_docstring_like);
        if (first_removed == field.end()) continue;
        syntax::Span hole = first_removed->span;
        field.erase(std::remove_if(field.begin(), field.end(), is_docstring_like), field.end());
        if (field.empty() && node.kind != NodeKind::Module) field.emplace_back(NodeKind::Pass, hole);
    }
}

constexpr std::string_view kLeadChars = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_";
constexpr std::string_view kTailChars = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_0123456789";

std::string random_name(Rng& rng) {
    std::string out;
    out.reserve(kRandomNameLength);
    out += kLeadChars[rng.below(kLeadChars.size())];
    while (out.size() < kRandomNameLength) out += kTailChars[rng.below(kTailChars.size())];
    return out;
}

}  // namespace

std::vector<IdentifierOccurrence> collect_identifiers(const SyntaxTree& tree) {
    std::vector<IdentifierOccurrence> out;
    walk_sites(tree.root, [&](const SyntaxNode& node, const std::string& text, IdentifierCategory category, bool) {
        out.push_back({text, category, &node, node.span});
    });
    return out;
}

SyntaxTree strip_comments(const SyntaxTree& tree) {
    SyntaxTree out = tree;
    strip_in_place(out.root);
    return out;
}

SyntaxTree scramble_identifiers(const SyntaxTree& tree, std::uint64_t seed) {
    SyntaxTree out = tree;
    std::vector<std::string> pool = distinct_names(tree.root);
    if (pool.empty()) return out;
    std::vector<std::string> no_underscore;
    for (const auto& name : pool)
        if (name != "_") no_underscore.push_back(name);

    Rng rng(seed);
    walk_sites(out.root, [&](SyntaxNode&, std::string& text, IdentifierCategory, bool capture) {
        // A capture target never holds "_" in a parsed tree, so the reduced
        // pool is non-empty whenever it is needed.
        const auto& from = capture ? no_underscore : pool;
        text = from[rng.below(from.size())];
    });
    return out;
}

RenameMap randomize_map(const SyntaxTree& tree, std::uint64_t seed) {
    RenameMap map;
    map.seed = seed;
    std::vector<std::string> names = distinct_names(tree.root);
    std::set<std::string> taken(names.begin(), names.end());
    Rng rng(seed);
    for (const auto& name : names) {
        std::string candidate;
        do {
            candidate = random_name(rng);
        } while (taken.count(candidate) || syntax::detail::is_keyword(candidate));
        taken.insert(candidate);
        map.entries.emplace(name, std::move(candidate));
    }
    return map;
}

SyntaxTree rename(const SyntaxTree& tree, const RenameMap& map) {
    SyntaxTree out = tree;
    walk_sites(out.root, [&](SyntaxNode&, std::string& text, IdentifierCategory, bool) {
        auto it = map.entries.find(text);
        if (it != map.entries.end()) text = it->second;
    });
    return out;
}

std::string_view mode_name(TransformMode mode) {
    switch (mode) {
        case TransformMode::Raw: return "raw";
        case TransformMode::CommentFree: return "cf";
        case TransformMode::CommentFreeScrambled: return "cf_s";
        case TransformMode::CommentFreeRandomized: return "cf_r";
    }
    return "?";
}

TransformMode parse_mode(std::string_view name) {
    for (auto mode : {TransformMode::Raw, TransformMode::CommentFree, TransformMode::CommentFreeScrambled,
                      TransformMode::CommentFreeRandomized})
        if (mode_name(mode) == name) return mode;
    throw std::invalid_argument(fmt::format("unknown transform mode '{}' (expected raw, cf, cf_s or cf_r)", name));
}

nlohmann::ordered_json TransformSpec::to_json() const {
    return {{"mode", std::string(mode_name(mode))}, {"seed", seed}};
}

TransformSpec TransformSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("mode") || !j["mode"].is_string())
        throw std::invalid_argument("transform spec needs a string field 'mode'");
    TransformSpec spec;
    spec.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            throw std::invalid_argument("transform spec 'seed' must be a non-negative integer");
        spec.seed = j["seed"].get<std::uint64_t>();
    }
    return spec;
}

SyntaxTree apply(const TransformSpec& spec, const SyntaxTree& tree) {
    switch (spec.mode) {
        case TransformMode::Raw: return tree;
        case TransformMode::CommentFree: return strip_comments(tree);
        case TransformMode::CommentFreeScrambled: return scramble_identifiers(strip_comments(tree), spec.seed);
        case TransformMode::CommentFreeRandomized: return randomize_identifiers(strip_comments(tree), spec.seed);
    }
    return tree;
}

}  // namespace codecorpus::transforms
