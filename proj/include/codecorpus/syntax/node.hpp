// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace codecorpus::syntax {

// Node kinds of the Python 3.10 abstract grammar. Names match the class names
// of CPython's `ast` module so that dumps line up with the reference parser.
// Context markers (Load/Store/Del) and operator tokens are node attributes
// here rather than nodes.
enum class NodeKind : std::uint8_t {
    // mod
    Module,
    // stmt
    FunctionDef, AsyncFunctionDef, ClassDef, Return, Delete, Assign, AugAssign, AnnAssign,
    For, AsyncFor, While, If, With, AsyncWith, Match, Raise, Try, Assert, Import, ImportFrom,
    Global, Nonlocal, Expr, Pass, Break, Continue,
    // expr
    BoolOp, NamedExpr, BinOp, UnaryOp, Lambda, IfExp, Dict, Set, ListComp, SetComp, DictComp,
    GeneratorExp, Await, Yield, YieldFrom, Compare, Call, FormattedValue, JoinedStr, Constant,
    Attribute, Subscript, Starred, Name, List, Tuple, Slice,
    // helpers
    comprehension, ExceptHandler, arguments, arg, keyword, alias, withitem, match_case,
    // pattern
    MatchValue, MatchSingleton, MatchSequence, MatchMapping, MatchClass, MatchStar, MatchAs, MatchOr,
    // Placeholder for a missing entry inside a list field (dict `**x` keys,
    // keyword-only arguments without default). Skipped by every traversal.
    Absent,
};

inline constexpr std::size_t kNodeKindCount = static_cast<std::size_t>(NodeKind::Absent) + 1;

std::string_view kind_name(NodeKind kind);

bool is_statement(NodeKind kind);
bool is_expression(NodeKind kind);

enum class Operator : std::uint8_t {
    None,
    // boolop
    And, Or,
    // operator
    Add, Sub, Mult, MatMult, Div, Mod, Pow, LShift, RShift, BitOr, BitXor, BitAnd, FloorDiv,
    // unaryop
    Invert, Not, UAdd, USub,
    // cmpop
    Eq, NotEq, Lt, LtE, Gt, GtE, Is, IsNot, In, NotIn,
};

std::string_view operator_name(Operator op);

enum class Context : std::uint8_t { Load, Store, Del };

struct ConstantValue {
    enum class Type : std::uint8_t { None, True, False, Ellipsis, Int, Float, Complex, Str, Bytes };

    Type type = Type::None;
    // Int: decimal digits. Str: code points as UTF-8 (lone surrogates allowed).
    // Bytes: the raw byte values.
    std::string text;
    // Float value, or the imaginary part of a Complex.
    double number = 0.0;
    // The literal carried a `u` prefix (CPython's Constant.kind == "u").
    bool u_prefix = false;

    friend bool operator==(const ConstantValue&, const ConstantValue&) = default;
};

// Byte offsets [begin, end) into the parsed source.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

/// One node of the abstract syntax tree.
///
/// Children are grouped into the node-valued fields of the kind, in the order
/// CPython lists them in `_fields`; optional fields hold zero or one node and
/// list fields any number. Identifier payloads live in `name`, `asname` and
/// `names`, depending on the kind:
///
///   name   - Name.id, FunctionDef/ClassDef.name, arg.arg, keyword.arg,
///            Attribute.attr, alias.name, ImportFrom.module,
///            ExceptHandler.name, MatchAs.name, MatchStar.name,
///            MatchMapping.rest
///   asname - alias.asname
///   names  - Global/Nonlocal.names, MatchClass.kwd_attrs
///
/// An empty string means the optional identifier is absent.
struct SyntaxNode {
    NodeKind kind = NodeKind::Absent;
    Span span;
    std::vector<std::vector<SyntaxNode>> fields;

    std::string name;
    std::string asname;
    std::vector<std::string> names;

    ConstantValue value;            // Constant, MatchSingleton
    Operator op = Operator::None;   // BoolOp, BinOp, UnaryOp, AugAssign
    std::vector<Operator> ops;      // Compare
    Context ctx = Context::Load;    // Name, Attribute, Subscript, Starred, List, Tuple
    int level = 0;                  // ImportFrom
    int conversion = -1;            // FormattedValue: -1, 's', 'r' or 'a'
    bool simple = false;            // AnnAssign
    bool is_async = false;          // comprehension

    SyntaxNode() = default;
    explicit SyntaxNode(NodeKind k, Span s = {});

    std::vector<SyntaxNode>& field(std::size_t i) { return fields[i]; }
    const std::vector<SyntaxNode>& field(std::size_t i) const { return fields[i]; }

    // First node of an optional field, or nullptr.
    const SyntaxNode* optional(std::size_t i) const { return fields[i].empty() ? nullptr : &fields[i].front(); }
    SyntaxNode* optional(std::size_t i) { return fields[i].empty() ? nullptr : &fields[i].front(); }

    bool is_leaf() const;
    std::size_t child_count() const;

    // Visits child nodes in field order, skipping Absent placeholders.
    void for_each_child(const std::function<void(const SyntaxNode&)>& fn) const;
    void for_each_child(const std::function<void(SyntaxNode&)>& fn);

    friend bool operator==(const SyntaxNode&, const SyntaxNode&) = default;
};

// Number of node-valued fields for a kind.
std::size_t field_count(NodeKind kind);
std::string_view field_name(NodeKind kind, std::size_t index);

// Field indices, named after CPython's `_fields`.
namespace fld {
// Module
inline constexpr std::size_t body = 0;
// FunctionDef / AsyncFunctionDef
inline constexpr std::size_t fn_args = 0, fn_body = 1, fn_decorators = 2, fn_returns = 3;
// ClassDef
inline constexpr std::size_t cls_bases = 0, cls_keywords = 1, cls_body = 2, cls_decorators = 3;
// Return, Expr, Await, Yield, YieldFrom, Starred, Attribute, keyword, MatchValue
inline constexpr std::size_t value = 0;
// Delete
inline constexpr std::size_t targets = 0;
// Assign
inline constexpr std::size_t assign_targets = 0, assign_value = 1;
// AugAssign
inline constexpr std::size_t aug_target = 0, aug_value = 1;
// AnnAssign
inline constexpr std::size_t ann_target = 0, ann_annotation = 1, ann_value = 2;
// For / AsyncFor
inline constexpr std::size_t for_target = 0, for_iter = 1, for_body = 2, for_orelse = 3;
// While / If / IfExp
inline constexpr std::size_t test = 0, cond_body = 1, cond_orelse = 2;
// With / AsyncWith
inline constexpr std::size_t with_items = 0, with_body = 1;
// Match
inline constexpr std::size_t match_subject = 0, match_cases = 1;
// Raise
inline constexpr std::size_t raise_exc = 0, raise_cause = 1;
// Try
inline constexpr std::size_t try_body = 0, try_handlers = 1, try_orelse = 2, try_finalbody = 3;
// Assert
inline constexpr std::size_t assert_test = 0, assert_msg = 1;
// Import / ImportFrom
inline constexpr std::size_t import_names = 0;
// BoolOp
inline constexpr std::size_t bool_values = 0;
// NamedExpr
inline constexpr std::size_t named_target = 0, named_value = 1;
// BinOp
inline constexpr std::size_t left = 0, right = 1;
// UnaryOp
inline constexpr std::size_t operand = 0;
// Lambda
inline constexpr std::size_t lambda_args = 0, lambda_body = 1;
// Dict
inline constexpr std::size_t dict_keys = 0, dict_values = 1;
// Set, List, Tuple
inline constexpr std::size_t elts = 0;
// ListComp, SetComp, GeneratorExp
inline constexpr std::size_t comp_elt = 0, comp_generators = 1;
// DictComp
inline constexpr std::size_t dictcomp_key = 0, dictcomp_value = 1, dictcomp_generators = 2;
// Compare
inline constexpr std::size_t cmp_left = 0, cmp_comparators = 1;
// Call
inline constexpr std::size_t call_func = 0, call_args = 1, call_keywords = 2;
// FormattedValue
inline constexpr std::size_t fv_value = 0, fv_format_spec = 1;
// JoinedStr
inline constexpr std::size_t js_values = 0;
// Subscript
inline constexpr std::size_t sub_value = 0, sub_slice = 1;
// Slice
inline constexpr std::size_t slice_lower = 0, slice_upper = 1, slice_step = 2;
// comprehension
inline constexpr std::size_t gen_target = 0, gen_iter = 1, gen_ifs = 2;
// ExceptHandler
inline constexpr std::size_t handler_type = 0, handler_body = 1;
// arguments
inline constexpr std::size_t posonlyargs = 0, args = 1, vararg = 2, kwonlyargs = 3, kw_defaults = 4,
                             kwarg = 5, defaults = 6;
// arg
inline constexpr std::size_t annotation = 0;
// withitem
inline constexpr std::size_t context_expr = 0, optional_vars = 1;
// match_case
inline constexpr std::size_t case_pattern = 0, case_guard = 1, case_body = 2;
// MatchSequence, MatchOr
inline constexpr std::size_t patterns = 0;
// MatchMapping
inline constexpr std::size_t map_keys = 0, map_patterns = 1;
// MatchClass
inline constexpr std::size_t class_cls = 0, class_patterns = 1, class_kwd_patterns = 2;
// MatchAs
inline constexpr std::size_t as_pattern = 0;
}  // namespace fld

/// A parsed document.
struct SyntaxTree {
    SyntaxNode root;
    std::string source_id;
};

}  // namespace codecorpus::syntax
