// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/syntax/node.hpp"

#include <array>
#include <initializer_list>

namespace codecorpus::syntax {
namespace {

struct KindInfo {
    std::string_view name;
    std::array<std::string_view, 7> fields{};
    std::size_t field_count = 0;
};

constexpr KindInfo info(std::string_view name, std::initializer_list<std::string_view> fields = {}) {
    KindInfo k{name};
    for (auto f : fields) k.fields[k.field_count++] = f;
    return k;
}

constexpr std::array<KindInfo, kNodeKindCount> kKinds = {
    info("Module", {"body"}),
    info("FunctionDef", {"args", "body", "decorator_list", "returns"}),
    info("AsyncFunctionDef", {"args", "body", "decorator_list", "returns"}),
    info("ClassDef", {"bases", "keywords", "body", "decorator_list"}),
    info("Return", {"value"}),
    info("Delete", {"targets"}),
    info("Assign", {"targets", "value"}),
    info("AugAssign", {"target", "value"}),
    info("AnnAssign", {"target", "annotation", "value"}),
    info("For", {"target", "iter", "body", "orelse"}),
    info("AsyncFor", {"target", "iter", "body", "orelse"}),
    info("While", {"test", "body", "orelse"}),
    info("If", {"test", "body", "orelse"}),
    info("With", {"items", "body"}),
    info("AsyncWith", {"items", "body"}),
    info("Match", {"subject", "cases"}),
    info("Raise", {"exc", "cause"}),
    info("Try", {"body", "handlers", "orelse", "finalbody"}),
    info("Assert", {"test", "msg"}),
    info("Import", {"names"}),
    info("ImportFrom", {"names"}),
    info("Global"),
    info("Nonlocal"),
    info("Expr", {"value"}),
    info("Pass"),
    info("Break"),
    info("Continue"),
    info("BoolOp", {"values"}),
    info("NamedExpr", {"target", "value"}),
    info("BinOp", {"left", "right"}),
    info("UnaryOp", {"operand"}),
    info("Lambda", {"args", "body"}),
    info("IfExp", {"test", "body", "orelse"}),
    info("Dict", {"keys", "values"}),
    info("Set", {"elts"}),
    info("ListComp", {"elt", "generators"}),
    info("SetComp", {"elt", "generators"}),
    info("DictComp", {"key", "value", "generators"}),
    info("GeneratorExp", {"elt", "generators"}),
    info("Await", {"value"}),
    info("Yield", {"value"}),
    info("YieldFrom", {"value"}),
    info("Compare", {"left", "comparators"}),
    info("Call", {"func", "args", "keywords"}),
    info("FormattedValue", {"value", "format_spec"}),
    info("JoinedStr", {"values"}),
    info("Constant"),
    info("Attribute", {"value"}),
    info("Subscript", {"value", "slice"}),
    info("Starred", {"value"}),
    info("Name"),
    info("List", {"elts"}),
    info("Tuple", {"elts"}),
    info("Slice", {"lower", "upper", "step"}),
    info("comprehension", {"target", "iter", "ifs"}),
    info("ExceptHandler", {"type", "body"}),
    info("arguments", {"posonlyargs", "args", "vararg", "kwonlyargs", "kw_defaults", "kwarg", "defaults"}),
    info("arg", {"annotation"}),
    info("keyword", {"value"}),
    info("alias"),
    info("withitem", {"context_expr", "optional_vars"}),
    info("match_case", {"pattern", "guard", "body"}),
    info("MatchValue", {"value"}),
    info("MatchSingleton"),
    info("MatchSequence", {"patterns"}),
    info("MatchMapping", {"keys", "patterns"}),
    info("MatchClass", {"cls", "patterns", "kwd_patterns"}),
    info("MatchStar"),
    info("MatchAs", {"pattern"}),
    info("MatchOr", {"patterns"}),
    info("Absent"),
};

constexpr std::array<std::string_view, 30> kOperatorNames = {
    "None", "And", "Or", "Add", "Sub", "Mult", "MatMult", "Div", "Mod", "Pow", "LShift",
    "RShift", "BitOr", "BitXor", "BitAnd", "FloorDiv", "Invert", "Not", "UAdd", "USub",
    "Eq", "NotEq", "Lt", "LtE", "Gt", "GtE", "Is", "IsNot", "In", "NotIn",
};

const KindInfo& kind_info(NodeKind kind) { return kKinds[static_cast<std::size_t>(kind)]; }

}  // namespace

std::string_view kind_name(NodeKind kind) { return kind_info(kind).name; }

bool is_statement(NodeKind kind) { return kind >= NodeKind::FunctionDef && kind <= NodeKind::Continue; }

bool is_expression(NodeKind kind) { return kind >= NodeKind::BoolOp && kind <= NodeKind::Slice; }

std::string_view operator_name(Operator op) { return kOperatorNames[static_cast<std::size_t>(op)]; }

std::size_t field_count(NodeKind kind) { return kind_info(kind).field_count; }

std::string_view field_name(NodeKind kind, std::size_t index) { return kind_info(kind).fields[index]; }

SyntaxNode::SyntaxNode(NodeKind k, Span s) : kind(k), span(s), fields(field_count(k)) {}

bool SyntaxNode::is_leaf() const { return child_count() == 0; }

std::size_t SyntaxNode::child_count() const {
    std::size_t n = 0;
    for (const auto& f : fields) {
        for (const auto& c : f) {
            if (c.kind != NodeKind::Absent) ++n;
        }
    }
    return n;
}

void SyntaxNode::for_each_child(const std::function<void(const SyntaxNode&)>& fn) const {
    for (const auto& f : fields) {
        for (const auto& c : f) {
            if (c.kind != NodeKind::Absent) fn(c);
        }
    }
}

void SyntaxNode::for_each_child(const std::function<void(SyntaxNode&)>& fn) {
    for (auto& f : fields) {
        for (auto& c : f) {
            if (c.kind != NodeKind::Absent) fn(c);
        }
    }
}

}  // namespace codecorpus::syntax
