// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/syntax/analysis.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

#include "codecorpus/common/parallel.hpp"
#include "codecorpus/common/unicode.hpp"
#include "codecorpus/syntax/parser.hpp"
#include "codecorpus/syntax/unparse.hpp"

namespace codecorpus::syntax {
namespace {

std::string repr_identifier(std::string_view s) {
    ConstantValue v;
    v.type = ConstantValue::Type::Str;
    v.text = std::string(s);
    return constant_repr(v);
}

std::string_view context_name(Context ctx) {
    switch (ctx) {
        case Context::Load: return "Load()";
        case Context::Store: return "Store()";
        case Context::Del: return "Del()";
    }
    return {};
}

class Dumper {
public:
    std::string run(const SyntaxNode& n) {
        node(n);
        return std::move(out_);
    }

private:
    struct Args {
        Dumper& d;
        bool first = true;
        void key(std::string_view name) {
            if (!first) d.out_ += ", ";
            first = false;
            d.out_ += name;
            d.out_ += '=';
        }
    };

    void list(const std::vector<SyntaxNode>& items) {
        out_ += '[';
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out_ += ", ";
            node(items[i]);
        }
        out_ += ']';
    }

    void strings(const std::vector<std::string>& items) {
        out_ += '[';
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out_ += ", ";
            out_ += repr_identifier(items[i]);
        }
        out_ += ']';
    }

    void ops(const std::vector<Operator>& items) {
        out_ += '[';
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out_ += ", ";
            out_ += operator_name(items[i]);
            out_ += "()";
        }
        out_ += ']';
    }

    // Field helpers; `optional` fields are omitted when empty, like ast.dump
    // omits None-valued optional fields.
    void f_node(Args& a, std::string_view name, const SyntaxNode& n, std::size_t index) {
        a.key(name);
        node(n.field(index).front());
    }
    void f_opt(Args& a, std::string_view name, const SyntaxNode& n, std::size_t index) {
        if (n.field(index).empty()) return;
        a.key(name);
        node(n.field(index).front());
    }
    void f_list(Args& a, std::string_view name, const SyntaxNode& n, std::size_t index) {
        a.key(name);
        list(n.field(index));
    }
    void f_text(Args& a, std::string_view name, const std::string& s) {
        a.key(name);
        out_ += repr_identifier(s);
    }
    void f_opt_text(Args& a, std::string_view name, const std::string& s) {
        if (!s.empty()) f_text(a, name, s);
    }
    void f_raw(Args& a, std::string_view name, std::string_view raw) {
        a.key(name);
        out_ += raw;
    }
    void f_op(Args& a, Operator op) {
        a.key("op");
        out_ += operator_name(op);
        out_ += "()";
    }
    void f_ctx(Args& a, Context ctx) { f_raw(a, "ctx", context_name(ctx)); }

    void node(const SyntaxNode& n) {
        using K = NodeKind;
        if (n.kind == K::Absent) {
            out_ += "None";
            return;
        }
        out_ += kind_name(n.kind);
        out_ += '(';
        Args a{*this};
        switch (n.kind) {
            case K::Module:
                f_list(a, "body", n, fld::body);
                f_raw(a, "type_ignores", "[]");
                break;
            case K::FunctionDef:
            case K::AsyncFunctionDef:
                f_text(a, "name", n.name);
                f_node(a, "args", n, fld::fn_args);
                f_list(a, "body", n, fld::fn_body);
                f_list(a, "decorator_list", n, fld::fn_decorators);
                f_opt(a, "returns", n, fld::fn_returns);
                break;
            case K::ClassDef:
                f_text(a, "name", n.name);
                f_list(a, "bases", n, fld::cls_bases);
                f_list(a, "keywords", n, fld::cls_keywords);
                f_list(a, "body", n, fld::cls_body);
                f_list(a, "decorator_list", n, fld::cls_decorators);
                break;
            case K::Return:
            case K::Yield: f_opt(a, "value", n, fld::value); break;
            case K::Delete: f_list(a, "targets", n, fld::targets); break;
            case K::Assign:
                f_list(a, "targets", n, fld::assign_targets);
                f_node(a, "value", n, fld::assign_value);
                break;
            case K::AugAssign:
                f_node(a, "target", n, fld::aug_target);
                f_op(a, n.op);
                f_node(a, "value", n, fld::aug_value);
                break;
            case K::AnnAssign:
                f_node(a, "target", n, fld::ann_target);
                f_node(a, "annotation", n, fld::ann_annotation);
                f_opt(a, "value", n, fld::ann_value);
                f_raw(a, "simple", n.simple ? "1" : "0");
                break;
            case K::For:
            case K::AsyncFor:
                f_node(a, "target", n, fld::for_target);
                f_node(a, "iter", n, fld::for_iter);
                f_list(a, "body", n, fld::for_body);
                f_list(a, "orelse", n, fld::for_orelse);
                break;
            case K::While:
            case K::If:
                f_node(a, "test", n, fld::test);
                f_list(a, "body", n, fld::cond_body);
                f_list(a, "orelse", n, fld::cond_orelse);
                break;
            case K::IfExp:
                f_node(a, "test", n, fld::test);
                f_node(a, "body", n, fld::cond_body);
                f_node(a, "orelse", n, fld::cond_orelse);
                break;
            case K::With:
            case K::AsyncWith:
                f_list(a, "items", n, fld::with_items);
                f_list(a, "body", n, fld::with_body);
                break;
            case K::Match:
                f_node(a, "subject", n, fld::match_subject);
                f_list(a, "cases", n, fld::match_cases);
                break;
            case K::Raise:
                f_opt(a, "exc", n, fld::raise_exc);
                f_opt(a, "cause", n, fld::raise_cause);
                break;
            case K::Try:
                f_list(a, "body", n, fld::try_body);
                f_list(a, "handlers", n, fld::try_handlers);
                f_list(a, "orelse", n, fld::try_orelse);
                f_list(a, "finalbody", n, fld::try_finalbody);
                break;
            case K::Assert:
                f_node(a, "test", n, fld::assert_test);
                f_opt(a, "msg", n, fld::assert_msg);
                break;
            case K::Import: f_list(a, "names", n, fld::import_names); break;
            case K::ImportFrom:
                f_opt_text(a, "module", n.name);
                f_list(a, "names", n, fld::import_names);
                f_raw(a, "level", std::to_string(n.level));
                break;
            case K::Global:
            case K::Nonlocal:
                a.key("names");
                strings(n.names);
                break;
            case K::Expr:
            case K::Await:
            case K::YieldFrom:
            case K::MatchValue: f_node(a, "value", n, fld::value); break;
            case K::Pass:
            case K::Break:
            case K::Continue: break;
            case K::BoolOp:
                f_op(a, n.op);
                f_list(a, "values", n, fld::bool_values);
                break;
            case K::NamedExpr:
                f_node(a, "target", n, fld::named_target);
                f_node(a, "value", n, fld::named_value);
                break;
            case K::BinOp:
                f_node(a, "left", n, fld::left);
                f_op(a, n.op);
                f_node(a, "right", n, fld::right);
                break;
            case K::UnaryOp:
                f_op(a, n.op);
                f_node(a, "operand", n, fld::operand);
                break;
            case K::Lambda:
                f_node(a, "args", n, fld::lambda_args);
                f_node(a, "body", n, fld::lambda_body);
                break;
            case K::Dict:
                f_list(a, "keys", n, fld::dict_keys);
                f_list(a, "values", n, fld::dict_values);
                break;
            case K::Set: f_list(a, "elts", n, fld::elts); break;
            case K::ListComp:
            case K::SetComp:
            case K::GeneratorExp:
                f_node(a, "elt", n, fld::comp_elt);
                f_list(a, "generators", n, fld::comp_generators);
                break;
            case K::DictComp:
                f_node(a, "key", n, fld::dictcomp_key);
                f_node(a, "value", n, fld::dictcomp_value);
                f_list(a, "generators", n, fld::dictcomp_generators);
                break;
            case K::Compare:
                f_node(a, "left", n, fld::cmp_left);
                a.key("ops");
                ops(n.ops);
                f_list(a, "comparators", n, fld::cmp_comparators);
                break;
            case K::Call:
                f_node(a, "func", n, fld::call_func);
                f_list(a, "args", n, fld::call_args);
                f_list(a, "keywords", n, fld::call_keywords);
                break;
            case K::FormattedValue:
                f_node(a, "value", n, fld::fv_value);
                f_raw(a, "conversion", std::to_string(n.conversion));
                f_opt(a, "format_spec", n, fld::fv_format_spec);
                break;
            case K::JoinedStr: f_list(a, "values", n, fld::js_values); break;
            case K::Constant:
                f_raw(a, "value", constant_repr(n.value));
                if (n.value.u_prefix) f_raw(a, "kind", "'u'");
                break;
            case K::MatchSingleton: f_raw(a, "value", constant_repr(n.value)); break;
            case K::Attribute:
                f_node(a, "value", n, fld::value);
                f_text(a, "attr", n.name);
                f_ctx(a, n.ctx);
                break;
            case K::Subscript:
                f_node(a, "value", n, fld::sub_value);
                f_node(a, "slice", n, fld::sub_slice);
                f_ctx(a, n.ctx);
                break;
            case K::Starred:
                f_node(a, "value", n, fld::value);
                f_ctx(a, n.ctx);
                break;
            case K::Name:
                f_text(a, "id", n.name);
                f_ctx(a, n.ctx);
                break;
            case K::List:
            case K::Tuple:
                f_list(a, "elts", n, fld::elts);
                f_ctx(a, n.ctx);
                break;
            case K::Slice:
                f_opt(a, "lower", n, fld::slice_lower);
                f_opt(a, "upper", n, fld::slice_upper);
                f_opt(a, "step", n, fld::slice_step);
                break;
            case K::comprehension:
                f_node(a, "target", n, fld::gen_target);
                f_node(a, "iter", n, fld::gen_iter);
                f_list(a, "ifs", n, fld::gen_ifs);
                f_raw(a, "is_async", n.is_async ? "1" : "0");
                break;
            case K::ExceptHandler:
                f_opt(a, "type", n, fld::handler_type);
                f_opt_text(a, "name", n.name);
                f_list(a, "body", n, fld::handler_body);
                break;
            case K::arguments:
                f_list(a, "posonlyargs", n, fld::posonlyargs);
                f_list(a, "args", n, fld::args);
                f_opt(a, "vararg", n, fld::vararg);
                f_list(a, "kwonlyargs", n, fld::kwonlyargs);
                f_list(a, "kw_defaults", n, fld::kw_defaults);
                f_opt(a, "kwarg", n, fld::kwarg);
                f_list(a, "defaults", n, fld::defaults);
                break;
            case K::arg:
                f_text(a, "arg", n.name);
                f_opt(a, "annotation", n, fld::annotation);
                break;
            case K::keyword:
                f_opt_text(a, "arg", n.name);
                f_node(a, "value", n, fld::value);
                break;
            case K::alias:
                f_text(a, "name", n.name);
                f_opt_text(a, "asname", n.asname);
                break;
            case K::withitem:
                f_node(a, "context_expr", n, fld::context_expr);
                f_opt(a, "optional_vars", n, fld::optional_vars);
                break;
            case K::match_case:
                f_node(a, "pattern", n, fld::case_pattern);
                f_opt(a, "guard", n, fld::case_guard);
                f_list(a, "body", n, fld::case_body);
                break;
            case K::MatchSequence:
            case K::MatchOr: f_list(a, "patterns", n, fld::patterns); break;
            case K::MatchMapping:
                f_list(a, "keys", n, fld::map_keys);
                f_list(a, "patterns", n, fld::map_patterns);
                f_opt_text(a, "rest", n.name);
                break;
            case K::MatchClass:
                f_node(a, "cls", n, fld::class_cls);
                f_list(a, "patterns", n, fld::class_patterns);
                a.key("kwd_attrs");
                strings(n.names);
                f_list(a, "kwd_patterns", n, fld::class_kwd_patterns);
                break;
            case K::MatchStar: f_opt_text(a, "name", n.name); break;
            case K::MatchAs:
                f_opt(a, "pattern", n, fld::as_pattern);
                f_opt_text(a, "name", n.name);
                break;
            case K::Absent: break;
        }
        out_ += ')';
    }

    std::string out_;
};

bool valid_dotted(std::string_view s) {
    std::size_t start = 0;
    while (true) {
        std::size_t dot = s.find('.', start);
        if (!unicode::is_identifier(s.substr(start, dot - start))) return false;
        if (dot == std::string_view::npos) return true;
        start = dot + 1;
    }
}

}  // namespace

std::string dump(const SyntaxNode& node) { return Dumper().run(node); }

std::size_t depth(const SyntaxNode& node) {
    std::size_t best = 0;
    std::vector<std::pair<const SyntaxNode*, std::size_t>> stack{{&node, 1}};
    while (!stack.empty()) {
        auto [n, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        n->for_each_child([&stack, d = d](const SyntaxNode& c) { stack.emplace_back(&c, d + 1); });
    }
    return best;
}

DepthBin classify_depth(std::size_t d, const DepthBins& bins) {
    if (d <= bins.shallow_max) return DepthBin::Shallow;
    if (d <= bins.middle_max) return DepthBin::Middle;
    if (d <= bins.deep_max) return DepthBin::Deep;
    return DepthBin::Overflow;
}

std::string_view bin_name(DepthBin bin) {
    switch (bin) {
        case DepthBin::Shallow: return "shallow";
        case DepthBin::Middle: return "middle";
        case DepthBin::Deep: return "deep";
        case DepthBin::Overflow: return "overflow";
    }
    return {};
}

void DepthProfile::merge(const DepthProfile& other) {
    for (const auto& [d, count] : other.histogram) histogram[d] += count;
    parsed += other.parsed;
    failed += other.failed;
}

nlohmann::ordered_json DepthProfile::to_json() const {
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [d, count] : histogram) hist[std::to_string(d)] = count;
    nlohmann::ordered_json j;
    j["histogram"] = std::move(hist);
    j["parsed"] = parsed;
    j["failed"] = failed;
    return j;
}

DepthProfile DepthProfile::from_json(const nlohmann::json& j) {
    DepthProfile p;
    for (const auto& [key, count] : j.at("histogram").items()) {
        p.histogram[std::stoul(key)] = count.get<std::size_t>();
    }
    p.parsed = j.at("parsed").get<std::size_t>();
    p.failed = j.at("failed").get<std::size_t>();
    return p;
}

DepthProfile depth_profile(const std::vector<std::string>& documents, unsigned workers) {
    std::vector<std::size_t> depths(documents.size(), 0);
    parallel_for(documents.size(), workers, [&](std::size_t i) {
        auto result = parse(documents[i]);
        if (result) depths[i] = depth(result.tree());
    });
    DepthProfile profile;
    for (std::size_t d : depths) {
        if (d == 0) {
            ++profile.failed;
        } else {
            ++profile.parsed;
            ++profile.histogram[d];
        }
    }
    return profile;
}

std::string kind_signature(const SyntaxNode& node) {
    std::string out;
    // Explicit stack: (node, next child index) frames, children flattened.
    struct Frame {
        std::vector<const SyntaxNode*> children;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;
    auto enter = [&](const SyntaxNode& n) {
        out += kind_name(n.kind);
        Frame f;
        n.for_each_child([&f](const SyntaxNode& c) { f.children.push_back(&c); });
        if (!f.children.empty()) out += '(';
        stack.push_back(std::move(f));
    };
    enter(node);
    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next < top.children.size()) {
            if (top.next > 0) out += ',';
            const SyntaxNode* child = top.children[top.next++];
            enter(*child);
            continue;
        }
        bool had_children = !top.children.empty();
        stack.pop_back();
        if (had_children) out += ')';
    }
    return out;
}

bool kind_isomorphic(const SyntaxNode& a, const SyntaxNode& b) { return kind_signature(a) == kind_signature(b); }

std::string check_invariants(const SyntaxNode& root) {
    std::vector<const SyntaxNode*> stack{&root};
    while (!stack.empty()) {
        const SyntaxNode* n = stack.back();
        stack.pop_back();
        if (n->span.begin > n->span.end) return fmt::format("{} has an inverted span", kind_name(n->kind));
        bool dotted = n->kind == NodeKind::alias || n->kind == NodeKind::ImportFrom;
        auto bad_name = [&](const std::string& s) {
            if (n->kind == NodeKind::alias && s == "*") return false;
            return dotted ? !valid_dotted(s) : !unicode::is_identifier(s);
        };
        if (!n->name.empty() && n->kind != NodeKind::Constant && bad_name(n->name)) {
            return fmt::format("{} carries invalid identifier '{}'", kind_name(n->kind), n->name);
        }
        if (!n->asname.empty() && !unicode::is_identifier(n->asname)) {
            return fmt::format("{} carries invalid identifier '{}'", kind_name(n->kind), n->asname);
        }
        for (const auto& s : n->names) {
            if (!unicode::is_identifier(s)) return fmt::format("{} carries invalid identifier '{}'", kind_name(n->kind), s);
        }
        std::string problem;
        n->for_each_child([&](const SyntaxNode& c) {
            if (problem.empty() && (c.span.begin < n->span.begin || c.span.end > n->span.end)) {
                problem = fmt::format("{} span [{}, {}) escapes parent {} [{}, {})", kind_name(c.kind), c.span.begin,
                                      c.span.end, kind_name(n->kind), n->span.begin, n->span.end);
            }
            stack.push_back(&c);
        });
        if (!problem.empty()) return problem;
    }
    return {};
}

}  // namespace codecorpus::syntax
