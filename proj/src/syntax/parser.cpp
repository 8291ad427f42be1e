// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/syntax/parser.hpp"

#include <algorithm>
#include <deque>
#include <optional>

#include "codecorpus/common/unicode.hpp"
#include "lexer.hpp"
#include "literals.hpp"

namespace codecorpus::syntax {
namespace detail {
namespace {

using Nodes = std::vector<SyntaxNode>;

constexpr int kMaxNesting = 400;
constexpr std::size_t kMaxChain = 3000;

struct Binary {
    std::string_view token;
    Operator op;
};

constexpr Binary kShiftOps[] = {{"<<", Operator::LShift}, {">>", Operator::RShift}};
constexpr Binary kSumOps[] = {{"+", Operator::Add}, {"-", Operator::Sub}};
constexpr Binary kTermOps[] = {{"*", Operator::Mult}, {"/", Operator::Div}, {"//", Operator::FloorDiv},
                               {"%", Operator::Mod}, {"@", Operator::MatMult}};
constexpr Binary kAugOps[] = {{"+=", Operator::Add}, {"-=", Operator::Sub}, {"*=", Operator::Mult},
                              {"@=", Operator::MatMult}, {"/=", Operator::Div}, {"%=", Operator::Mod},
                              {"&=", Operator::BitAnd}, {"|=", Operator::BitOr}, {"^=", Operator::BitXor},
                              {"<<=", Operator::LShift}, {">>=", Operator::RShift}, {"**=", Operator::Pow},
                              {"//=", Operator::FloorDiv}};

bool is_py_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

SyntaxNode make_constant(ConstantValue value, Span span) {
    SyntaxNode n(NodeKind::Constant, span);
    n.value = std::move(value);
    return n;
}

std::string_view describe(const SyntaxNode& n) {
    switch (n.kind) {
        case NodeKind::Call: return "function call";
        case NodeKind::Constant:
            switch (n.value.type) {
                case ConstantValue::Type::True: return "True";
                case ConstantValue::Type::False: return "False";
                case ConstantValue::Type::None: return "None";
                case ConstantValue::Type::Ellipsis: return "Ellipsis";
                default: return "literal";
            }
        case NodeKind::BinOp:
        case NodeKind::UnaryOp: return "expression";
        case NodeKind::BoolOp: return "expression";
        case NodeKind::Compare: return "comparison";
        case NodeKind::Lambda: return "lambda";
        case NodeKind::IfExp: return "conditional expression";
        case NodeKind::NamedExpr: return "named expression";
        case NodeKind::Yield:
        case NodeKind::YieldFrom: return "yield expression";
        case NodeKind::Await: return "await expression";
        case NodeKind::JoinedStr:
        case NodeKind::FormattedValue: return "f-string expression";
        case NodeKind::Dict: return "dict literal";
        case NodeKind::Set: return "set display";
        case NodeKind::ListComp: return "list comprehension";
        case NodeKind::SetComp: return "set comprehension";
        case NodeKind::DictComp: return "dict comprehension";
        case NodeKind::GeneratorExp: return "generator expression";
        case NodeKind::Starred: return "starred";
        case NodeKind::Tuple: return "tuple";
        case NodeKind::List: return "list";
        default: return "expression";
    }
}

enum class TargetMode { Store, Del };

class Parser {
public:
    Parser(std::string_view source, std::vector<Token> tokens) : src_(source), toks_(std::move(tokens)) {}

    SyntaxNode parse_module() {
        SyntaxNode mod(NodeKind::Module, {0, src_.size()});
        while (tok().type != TokenType::EndMarker) parse_statement(mod.field(fld::body));
        return mod;
    }

    // Entry point for the expression part of an f-string replacement field.
    SyntaxNode parse_fstring_expression() {
        SyntaxNode e = parse_star_expressions();
        if (tok().type == TokenType::Newline) advance();
        if (tok().type != TokenType::EndMarker) fail("invalid syntax");
        return e;
    }

private:
    // ---------------------------------------------------------------- tokens

    const Token& tok(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

    bool at_op(std::string_view op, std::size_t k = 0) const { return tok(k).is_op(op); }
    bool at_kw(std::string_view kw, std::size_t k = 0) const { return tok(k).is_name(kw); }
    bool at_identifier(std::size_t k = 0) const {
        const Token& t = tok(k);
        return t.type == TokenType::Name && !is_keyword(t.text);
    }

    const Token& advance() {
        const Token& t = toks_[pos_];
        if (t.type == TokenType::Name || t.type == TokenType::Number || t.type == TokenType::String ||
            t.type == TokenType::Op) {
            prev_end_ = t.end;
        }
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    bool accept_op(std::string_view op) {
        if (!at_op(op)) return false;
        advance();
        return true;
    }

    bool accept_kw(std::string_view kw) {
        if (!at_kw(kw)) return false;
        advance();
        return true;
    }

    void expect_op(std::string_view op) {
        if (!accept_op(op)) fail(std::string("expected '") + std::string(op) + "'");
    }

    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail(std::string("expected '") + std::string(kw) + "'");
    }

    void expect_newline() {
        if (tok().type != TokenType::Newline) fail("invalid syntax");
        advance();
    }

    std::string expect_identifier() {
        if (!at_identifier()) fail("invalid syntax");
        return std::string(advance().text);
    }

    [[noreturn]] void fail(const std::string& message) const { throw SyntaxError(tok().begin, message); }
    [[noreturn]] void fail_at(std::size_t offset, const std::string& message) const { throw SyntaxError(offset, message); }

    std::size_t here() const { return tok().begin; }

    SyntaxNode& finish(SyntaxNode& n) {
        n.span.end = std::max(prev_end_, n.span.begin);
        return n;
    }

    SyntaxNode node(NodeKind kind, std::size_t begin) {
        SyntaxNode n(kind, {begin, begin});
        return n;
    }

    struct NestingGuard {
        explicit NestingGuard(Parser& p) : parser(p) {
            if (++parser.nesting_ > kMaxNesting) parser.fail("too many nested expressions or blocks");
        }
        ~NestingGuard() { --parser.nesting_; }
        Parser& parser;
    };

    bool starts_expression(std::size_t k = 0) const {
        const Token& t = tok(k);
        switch (t.type) {
            case TokenType::Number:
            case TokenType::String: return true;
            case TokenType::Name:
                return !is_keyword(t.text) || t.text == "True" || t.text == "False" || t.text == "None" ||
                       t.text == "not" || t.text == "lambda" || t.text == "await";
            case TokenType::Op:
                return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
                       t.text == "~" || t.text == "*" || t.text == "...";
            default: return false;
        }
    }

    // ------------------------------------------------------------ statements

    void parse_statement(Nodes& out) {
        NestingGuard guard(*this);
        const Token& t = tok();
        if (t.type == TokenType::Indent) fail("unexpected indent");
        if (t.type == TokenType::Dedent) fail("unindent does not match any outer indentation level");
        if (t.type == TokenType::Newline) fail("invalid syntax");
        if (t.type == TokenType::Name) {
            if (t.text == "def") return out.push_back(parse_funcdef({}, here(), false));
            if (t.text == "class") return out.push_back(parse_classdef({}, here()));
            if (t.text == "if") return out.push_back(parse_if());
            if (t.text == "while") return out.push_back(parse_while());
            if (t.text == "for") return out.push_back(parse_for(here(), false));
            if (t.text == "with") return out.push_back(parse_with(here(), false));
            if (t.text == "try") return out.push_back(parse_try());
            if (t.text == "async") {
                std::size_t begin = here();
                advance();
                if (at_kw("def")) return out.push_back(parse_funcdef({}, begin, true));
                if (at_kw("for")) return out.push_back(parse_for(begin, true));
                if (at_kw("with")) return out.push_back(parse_with(begin, true));
                fail("invalid syntax");
            }
            if (t.text == "match") {
                if (auto m = try_parse_match()) return out.push_back(std::move(*m));
            }
        }
        if (t.is_op("@")) return out.push_back(parse_decorated());
        parse_simple_statements(out);
    }

    void parse_simple_statements(Nodes& out) {
        while (true) {
            out.push_back(parse_simple_statement());
            if (accept_op(";")) {
                if (tok().type == TokenType::Newline) break;
                continue;
            }
            break;
        }
        expect_newline();
    }

    bool at_statement_end() const { return tok().type == TokenType::Newline || at_op(";"); }

    Nodes parse_block(std::string_view what) {
        Nodes body;
        if (tok().type == TokenType::Newline) {
            advance();
            if (tok().type != TokenType::Indent) {
                fail("expected an indented block after " + std::string(what));
            }
            advance();
            while (tok().type != TokenType::Dedent && tok().type != TokenType::EndMarker) parse_statement(body);
            if (tok().type == TokenType::Dedent) advance();
        } else {
            parse_simple_statements(body);
        }
        return body;
    }

    SyntaxNode parse_simple_statement() {
        std::size_t begin = here();
        const Token& t = tok();
        if (t.type == TokenType::Name) {
            if (t.text == "pass" || t.text == "break" || t.text == "continue") {
                NodeKind k = t.text == "pass" ? NodeKind::Pass : t.text == "break" ? NodeKind::Break : NodeKind::Continue;
                advance();
                SyntaxNode n = node(k, begin);
                return finish(n);
            }
            if (t.text == "return") {
                advance();
                SyntaxNode n = node(NodeKind::Return, begin);
                if (!at_statement_end()) n.field(fld::value).push_back(parse_star_expressions());
                return finish(n);
            }
            if (t.text == "raise") {
                advance();
                SyntaxNode n = node(NodeKind::Raise, begin);
                if (!at_statement_end()) {
                    n.field(fld::raise_exc).push_back(parse_expression());
                    if (accept_kw("from")) n.field(fld::raise_cause).push_back(parse_expression());
                }
                return finish(n);
            }
            if (t.text == "global" || t.text == "nonlocal") {
                SyntaxNode n = node(t.text == "global" ? NodeKind::Global : NodeKind::Nonlocal, begin);
                advance();
                n.names.push_back(expect_identifier());
                while (accept_op(",")) n.names.push_back(expect_identifier());
                return finish(n);
            }
            if (t.text == "del") {
                advance();
                SyntaxNode n = node(NodeKind::Delete, begin);
                while (true) {
                    SyntaxNode target = parse_bitwise_or();
                    validate_target(target, TargetMode::Del);
                    n.field(fld::targets).push_back(std::move(target));
                    if (!accept_op(",")) break;
                    if (at_statement_end()) break;
                }
                return finish(n);
            }
            if (t.text == "assert") {
                advance();
                SyntaxNode n = node(NodeKind::Assert, begin);
                n.field(fld::assert_test).push_back(parse_expression());
                if (accept_op(",")) n.field(fld::assert_msg).push_back(parse_expression());
                return finish(n);
            }
            if (t.text == "import") return parse_import();
            if (t.text == "from") return parse_import_from();
        }
        return parse_expression_statement();
    }

    SyntaxNode parse_import() {
        std::size_t begin = here();
        advance();
        SyntaxNode n = node(NodeKind::Import, begin);
        do {
            std::size_t ab = here();
            SyntaxNode a = node(NodeKind::alias, ab);
            a.name = parse_dotted_name();
            if (accept_kw("as")) a.asname = expect_identifier();
            n.field(fld::import_names).push_back(std::move(finish(a)));
        } while (accept_op(","));
        return finish(n);
    }

    std::string parse_dotted_name() {
        std::string name = expect_identifier();
        while (at_op(".") && at_identifier(1)) {
            advance();
            name += '.';
            name += expect_identifier();
        }
        return name;
    }

    SyntaxNode parse_import_from() {
        std::size_t begin = here();
        advance();
        SyntaxNode n = node(NodeKind::ImportFrom, begin);
        while (at_op(".") || at_op("...")) n.level += static_cast<int>(advance().text.size());
        if (at_identifier()) {
            n.name = parse_dotted_name();
        } else if (n.level == 0) {
            fail("invalid syntax");
        }
        expect_kw("import");
        auto& names = n.field(fld::import_names);
        if (at_op("*")) {
            SyntaxNode a = node(NodeKind::alias, here());
            advance();
            a.name = "*";
            names.push_back(std::move(finish(a)));
            return finish(n);
        }
        bool parens = accept_op("(");
        while (true) {
            SyntaxNode a = node(NodeKind::alias, here());
            a.name = expect_identifier();
            if (accept_kw("as")) a.asname = expect_identifier();
            names.push_back(std::move(finish(a)));
            if (!accept_op(",")) break;
            if (parens && at_op(")")) break;
            if (!parens && at_statement_end()) fail("trailing comma not allowed without surrounding parentheses");
        }
        if (parens) expect_op(")");
        return finish(n);
    }

    SyntaxNode parse_star_expressions_or_yield() {
        if (at_kw("yield")) return parse_yield();
        return parse_star_expressions();
    }

    SyntaxNode parse_expression_statement() {
        std::size_t begin = here();
        bool starts_with_paren = at_op("(");
        SyntaxNode first = parse_star_expressions_or_yield();

        if (at_op(":")) {
            advance();
            switch (first.kind) {
                case NodeKind::Name:
                case NodeKind::Attribute:
                case NodeKind::Subscript: break;
                case NodeKind::Tuple: fail_at(first.span.begin, "only single target (not tuple) can be annotated");
                case NodeKind::List: fail_at(first.span.begin, "only single target (not list) can be annotated");
                default: fail_at(first.span.begin, "illegal target for annotation");
            }
            validate_target(first, TargetMode::Store);
            SyntaxNode n = node(NodeKind::AnnAssign, begin);
            n.simple = first.kind == NodeKind::Name && !starts_with_paren;
            n.field(fld::ann_target).push_back(std::move(first));
            n.field(fld::ann_annotation).push_back(parse_expression());
            if (accept_op("=")) n.field(fld::ann_value).push_back(parse_star_expressions_or_yield());
            return finish(n);
        }

        for (const auto& aug : kAugOps) {
            if (!at_op(aug.token)) continue;
            if (first.kind != NodeKind::Name && first.kind != NodeKind::Attribute && first.kind != NodeKind::Subscript) {
                fail_at(first.span.begin, "'" + std::string(describe(first)) + "' is an illegal expression for augmented assignment");
            }
            advance();
            validate_target(first, TargetMode::Store);
            SyntaxNode n = node(NodeKind::AugAssign, begin);
            n.op = aug.op;
            n.field(fld::aug_target).push_back(std::move(first));
            n.field(fld::aug_value).push_back(parse_star_expressions_or_yield());
            return finish(n);
        }

        if (at_op("=")) {
            Nodes items;
            items.push_back(std::move(first));
            while (accept_op("=")) items.push_back(parse_star_expressions_or_yield());
            SyntaxNode value = std::move(items.back());
            items.pop_back();
            for (auto& target : items) {
                if (target.kind == NodeKind::Yield || target.kind == NodeKind::YieldFrom) {
                    fail_at(target.span.begin, "assignment to yield expression not possible");
                }
                validate_target(target, TargetMode::Store);
            }
            SyntaxNode n = node(NodeKind::Assign, begin);
            n.field(fld::assign_targets) = std::move(items);
            n.field(fld::assign_value).push_back(std::move(value));
            return finish(n);
        }

        if (!at_statement_end()) fail("invalid syntax");
        SyntaxNode n = node(NodeKind::Expr, begin);
        n.field(fld::value).push_back(std::move(first));
        return finish(n);
    }

    void validate_target(SyntaxNode& n, TargetMode mode) {
        Context ctx = mode == TargetMode::Store ? Context::Store : Context::Del;
        const char* verb = mode == TargetMode::Store ? "assign to" : "delete";
        switch (n.kind) {
            case NodeKind::Name:
            case NodeKind::Attribute:
            case NodeKind::Subscript:
                n.ctx = ctx;
                return;
            case NodeKind::Starred:
                if (mode == TargetMode::Del) fail_at(n.span.begin, "cannot delete starred");
                n.ctx = ctx;
                if (n.field(fld::value).front().kind == NodeKind::Starred) {
                    fail_at(n.span.begin, "cannot assign to starred");
                }
                validate_target(n.field(fld::value).front(), mode);
                return;
            case NodeKind::Tuple:
            case NodeKind::List:
                n.ctx = ctx;
                for (auto& e : n.field(fld::elts)) validate_target(e, mode);
                return;
            default:
                fail_at(n.span.begin, std::string("cannot ") + verb + " " + std::string(describe(n)));
        }
    }

    std::vector<SyntaxNode> parse_decorators() {
        Nodes decorators;
        while (accept_op("@")) {
            decorators.push_back(parse_named_expression());
            expect_newline();
        }
        return decorators;
    }

    SyntaxNode parse_decorated() {
        std::size_t begin = here();
        Nodes decorators = parse_decorators();
        if (at_kw("def")) return parse_funcdef(std::move(decorators), begin, false);
        if (at_kw("class")) return parse_classdef(std::move(decorators), begin);
        if (at_kw("async") && at_kw("def", 1)) {
            advance();
            return parse_funcdef(std::move(decorators), begin, true);
        }
        fail("invalid syntax");
    }

    SyntaxNode parse_funcdef(Nodes decorators, std::size_t begin, bool is_async) {
        expect_kw("def");
        SyntaxNode n = node(is_async ? NodeKind::AsyncFunctionDef : NodeKind::FunctionDef, begin);
        n.name = expect_identifier();
        expect_op("(");
        n.field(fld::fn_args).push_back(parse_parameters(")", true));
        expect_op(")");
        if (accept_op("->")) n.field(fld::fn_returns).push_back(parse_expression());
        expect_op(":");
        n.field(fld::fn_body) = parse_block("function definition");
        n.field(fld::fn_decorators) = std::move(decorators);
        return finish(n);
    }

    SyntaxNode parse_classdef(Nodes decorators, std::size_t begin) {
        expect_kw("class");
        SyntaxNode n = node(NodeKind::ClassDef, begin);
        n.name = expect_identifier();
        if (accept_op("(")) {
            parse_call_arguments(n.field(fld::cls_bases), n.field(fld::cls_keywords), false);
            expect_op(")");
        }
        expect_op(":");
        n.field(fld::cls_body) = parse_block("class definition");
        n.field(fld::cls_decorators) = std::move(decorators);
        return finish(n);
    }

    SyntaxNode parse_param(bool annotations) {
        SyntaxNode a = node(NodeKind::arg, here());
        a.name = expect_identifier();
        if (annotations && accept_op(":")) a.field(fld::annotation).push_back(parse_expression());
        return finish(a);
    }

    // Parameter list up to (not including) `closer`.
    SyntaxNode parse_parameters(std::string_view closer, bool annotations) {
        std::size_t begin = here();
        SyntaxNode args = node(NodeKind::arguments, begin);
        Nodes positional;
        bool seen_slash = false;
        bool seen_star = false;
        bool seen_default = false;
        bool bare_star = false;
        std::size_t bare_star_at = 0;
        while (!at_op(closer)) {
            if (at_op("/")) {
                if (seen_slash || seen_star || positional.empty()) fail("invalid syntax");
                advance();
                seen_slash = true;
                args.field(fld::posonlyargs) = std::move(positional);
                positional.clear();
            } else if (at_op("**")) {
                advance();
                args.field(fld::kwarg).push_back(parse_param(annotations));
                accept_op(",");
                if (!at_op(closer)) fail("invalid syntax");
                break;
            } else if (at_op("*")) {
                if (seen_star) fail("invalid syntax");
                bare_star_at = here();
                advance();
                seen_star = true;
                if (at_op(",") || at_op(closer)) {
                    bare_star = true;
                } else {
                    args.field(fld::vararg).push_back(parse_param(annotations));
                }
            } else {
                SyntaxNode p = parse_param(annotations);
                std::optional<SyntaxNode> def;
                if (accept_op("=")) def = parse_expression();
                if (!seen_star) {
                    if (def) {
                        seen_default = true;
                        args.field(fld::defaults).push_back(std::move(*def));
                    } else if (seen_default) {
                        fail_at(p.span.begin, "non-default argument follows default argument");
                    }
                    positional.push_back(std::move(p));
                } else {
                    bare_star = false;
                    args.field(fld::kwonlyargs).push_back(std::move(p));
                    args.field(fld::kw_defaults).push_back(def ? std::move(*def) : SyntaxNode(NodeKind::Absent));
                }
            }
            if (!accept_op(",")) break;
        }
        if (bare_star && args.field(fld::kwonlyargs).empty()) {
            fail_at(bare_star_at, "named arguments must follow bare *");
        }
        if (seen_star && args.field(fld::vararg).empty() && args.field(fld::kwonlyargs).empty()) {
            fail_at(bare_star_at, "named arguments must follow bare *");
        }
        args.field(fld::args) = std::move(positional);
        finish(args);
        if (args.child_count() == 0 && args.field(fld::kw_defaults).empty()) args.span = {begin, begin};
        return args;
    }

    SyntaxNode parse_if() {
        std::size_t begin = here();
        advance();  // 'if' or 'elif'
        SyntaxNode n = node(NodeKind::If, begin);
        n.field(fld::test).push_back(parse_named_expression());
        expect_op(":");
        n.field(fld::cond_body) = parse_block("'if' statement");
        if (at_kw("elif")) {
            n.field(fld::cond_orelse).push_back(parse_if());
        } else if (accept_kw("else")) {
            expect_op(":");
            n.field(fld::cond_orelse) = parse_block("'else' statement");
        }
        return finish(n);
    }

    SyntaxNode parse_while() {
        std::size_t begin = here();
        advance();
        SyntaxNode n = node(NodeKind::While, begin);
        n.field(fld::test).push_back(parse_named_expression());
        expect_op(":");
        n.field(fld::cond_body) = parse_block("'while' statement");
        if (accept_kw("else")) {
            expect_op(":");
            n.field(fld::cond_orelse) = parse_block("'else' statement");
        }
        return finish(n);
    }

    SyntaxNode parse_for(std::size_t begin, bool is_async) {
        expect_kw("for");
        SyntaxNode n = node(is_async ? NodeKind::AsyncFor : NodeKind::For, begin);
        n.field(fld::for_target).push_back(parse_target_list());
        expect_kw("in");
        n.field(fld::for_iter).push_back(parse_star_expressions());
        expect_op(":");
        n.field(fld::for_body) = parse_block("'for' statement");
        if (accept_kw("else")) {
            expect_op(":");
            n.field(fld::for_orelse) = parse_block("'else' statement");
        }
        return finish(n);
    }

    // star_targets: comma-separated targets, a Tuple when there is a comma.
    SyntaxNode parse_target_list() {
        std::size_t begin = here();
        SyntaxNode first = parse_star_target();
        if (!at_op(",")) {
            validate_target(first, TargetMode::Store);
            return first;
        }
        SyntaxNode t = node(NodeKind::Tuple, begin);
        t.field(fld::elts).push_back(std::move(first));
        while (accept_op(",")) {
            if (at_kw("in") || at_op("=") || at_op(")")) break;
            t.field(fld::elts).push_back(parse_star_target());
        }
        finish(t);
        validate_target(t, TargetMode::Store);
        return t;
    }

    SyntaxNode parse_star_target() {
        if (at_op("*")) {
            std::size_t begin = here();
            advance();
            SyntaxNode s = node(NodeKind::Starred, begin);
            s.field(fld::value).push_back(parse_bitwise_or());
            return finish(s);
        }
        return parse_bitwise_or();
    }

    SyntaxNode parse_with_item() {
        std::size_t begin = here();
        SyntaxNode item = node(NodeKind::withitem, begin);
        item.field(fld::context_expr).push_back(parse_expression());
        if (accept_kw("as")) {
            SyntaxNode target = parse_star_target();
            if (!at_op(",") && !at_op(")") && !at_op(":")) fail("invalid syntax");
            validate_target(target, TargetMode::Store);
            item.field(fld::optional_vars).push_back(std::move(target));
        }
        return finish(item);
    }

    SyntaxNode parse_with(std::size_t begin, bool is_async) {
        expect_kw("with");
        SyntaxNode n = node(is_async ? NodeKind::AsyncWith : NodeKind::With, begin);
        auto& items = n.field(fld::with_items);
        bool done = false;
        if (at_op("(")) {
            std::size_t saved = pos_;
            std::size_t saved_end = prev_end_;
            try {
                advance();
                Nodes parsed;
                while (true) {
                    parsed.push_back(parse_with_item());
                    if (!accept_op(",")) break;
                    if (at_op(")")) break;
                }
                if (accept_op(")") && at_op(":")) {
                    items = std::move(parsed);
                    done = true;
                }
            } catch (const SyntaxError&) {
            }
            if (!done) {
                pos_ = saved;
                prev_end_ = saved_end;
            }
        }
        if (!done) {
            do {
                items.push_back(parse_with_item());
            } while (accept_op(","));
        }
        expect_op(":");
        n.field(fld::with_body) = parse_block("'with' statement");
        return finish(n);
    }

    SyntaxNode parse_try() {
        std::size_t begin = here();
        advance();
        SyntaxNode n = node(NodeKind::Try, begin);
        expect_op(":");
        n.field(fld::try_body) = parse_block("'try' statement");
        while (at_kw("except")) {
            SyntaxNode h = node(NodeKind::ExceptHandler, here());
            advance();
            if (!at_op(":")) {
                h.field(fld::handler_type).push_back(parse_expression());
                if (at_op(",")) fail("multiple exception types must be parenthesized");
                if (accept_kw("as")) h.name = expect_identifier();
            }
            expect_op(":");
            h.field(fld::handler_body) = parse_block("'except' statement");
            n.field(fld::try_handlers).push_back(std::move(finish(h)));
        }
        bool has_handlers = !n.field(fld::try_handlers).empty();
        if (has_handlers && accept_kw("else")) {
            expect_op(":");
            n.field(fld::try_orelse) = parse_block("'else' statement");
        }
        if (accept_kw("finally")) {
            expect_op(":");
            n.field(fld::try_finalbody) = parse_block("'finally' statement");
        }
        if (!has_handlers && n.field(fld::try_finalbody).empty()) fail("expected 'except' or 'finally' block");
        return finish(n);
    }

    // ------------------------------------------------------------------ match

    std::optional<SyntaxNode> try_parse_match() {
        std::size_t saved = pos_;
        std::size_t saved_end = prev_end_;
        std::size_t begin = here();
        SyntaxNode n = node(NodeKind::Match, begin);
        bool ok = false;
        try {
            advance();
            n.field(fld::match_subject).push_back(parse_match_subject());
            ok = accept_op(":") && tok().type == TokenType::Newline && tok(1).type == TokenType::Indent &&
                 at_kw("case", 2);
        } catch (const SyntaxError&) {
            ok = false;
        }
        if (!ok) {
            pos_ = saved;
            prev_end_ = saved_end;
            return std::nullopt;
        }
        advance();  // NEWLINE
        advance();  // INDENT
        while (at_kw("case")) n.field(fld::match_cases).push_back(parse_case());
        if (tok().type != TokenType::Dedent && tok().type != TokenType::EndMarker) fail("invalid syntax");
        if (tok().type == TokenType::Dedent) advance();
        return std::move(finish(n));
    }

    SyntaxNode parse_match_subject() {
        std::size_t begin = here();
        SyntaxNode first = parse_star_named_expression();
        if (!at_op(",")) {
            if (first.kind == NodeKind::Starred) fail("invalid syntax");
            return first;
        }
        SyntaxNode t = node(NodeKind::Tuple, begin);
        t.field(fld::elts).push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(":")) break;
            t.field(fld::elts).push_back(parse_star_named_expression());
        }
        return finish(t);
    }

    SyntaxNode parse_case() {
        SyntaxNode c = node(NodeKind::match_case, here());
        advance();  // 'case'
        c.field(fld::case_pattern).push_back(parse_patterns());
        if (accept_kw("if")) c.field(fld::case_guard).push_back(parse_named_expression());
        expect_op(":");
        c.field(fld::case_body) = parse_block("'case' statement");
        return finish(c);
    }

    SyntaxNode parse_patterns() {
        std::size_t begin = here();
        SyntaxNode first = parse_maybe_star_pattern();
        if (!at_op(",")) {
            if (first.kind == NodeKind::MatchStar) fail_at(begin, "invalid syntax");
            return first;
        }
        SyntaxNode seq = node(NodeKind::MatchSequence, begin);
        seq.field(fld::patterns).push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(":") || at_kw("if")) break;
            seq.field(fld::patterns).push_back(parse_maybe_star_pattern());
        }
        return finish(seq);
    }

    SyntaxNode parse_maybe_star_pattern() {
        if (at_op("*")) {
            SyntaxNode s = node(NodeKind::MatchStar, here());
            advance();
            std::string name = expect_identifier();
            if (name != "_") s.name = name;
            return finish(s);
        }
        return parse_pattern();
    }

    SyntaxNode parse_pattern() {
        NestingGuard guard(*this);
        std::size_t begin = here();
        SyntaxNode pat = parse_or_pattern();
        if (accept_kw("as")) {
            std::string name = expect_identifier();
            if (name == "_") fail("cannot use '_' as a target");
            SyntaxNode as = node(NodeKind::MatchAs, begin);
            as.field(fld::as_pattern).push_back(std::move(pat));
            as.name = std::move(name);
            return finish(as);
        }
        return pat;
    }

    SyntaxNode parse_or_pattern() {
        std::size_t begin = here();
        SyntaxNode first = parse_closed_pattern();
        if (!at_op("|")) return first;
        SyntaxNode n = node(NodeKind::MatchOr, begin);
        n.field(fld::patterns).push_back(std::move(first));
        while (accept_op("|")) n.field(fld::patterns).push_back(parse_closed_pattern());
        return finish(n);
    }

    // Signed real or complex number literal as used by patterns.
    SyntaxNode parse_signed_number() {
        std::size_t begin = here();
        auto signed_real = [&]() {
            std::size_t b = here();
            bool neg = accept_op("-");
            if (tok().type != TokenType::Number) fail("invalid syntax");
            SyntaxNode num = make_constant(number_value(tok().text), {tok().begin, tok().end});
            advance();
            if (!neg) return num;
            SyntaxNode u = node(NodeKind::UnaryOp, b);
            u.op = Operator::USub;
            u.field(fld::operand).push_back(std::move(num));
            return finish(u);
        };
        SyntaxNode real = signed_real();
        if (at_op("+") || at_op("-")) {
            Operator op = at_op("+") ? Operator::Add : Operator::Sub;
            advance();
            if (tok().type != TokenType::Number) fail("invalid syntax");
            SyntaxNode imag = make_constant(number_value(tok().text), {tok().begin, tok().end});
            if (imag.value.type != ConstantValue::Type::Complex) fail("imaginary number required in complex literal");
            advance();
            const SyntaxNode& r = real.kind == NodeKind::UnaryOp ? real.field(fld::operand).front() : real;
            if (r.value.type == ConstantValue::Type::Complex) fail("real number required in complex literal");
            SyntaxNode b = node(NodeKind::BinOp, begin);
            b.op = op;
            b.field(fld::left).push_back(std::move(real));
            b.field(fld::right).push_back(std::move(imag));
            return finish(b);
        }
        return real;
    }

    SyntaxNode parse_pattern_value_expr() {
        // Literal or dotted-name value usable as a pattern or mapping key.
        std::size_t begin = here();
        if (tok().type == TokenType::Number || at_op("-")) return parse_signed_number();
        if (tok().type == TokenType::String) {
            SyntaxNode s = parse_strings();
            if (s.kind == NodeKind::JoinedStr) fail_at(begin, "patterns may only match literals and attribute lookups");
            return s;
        }
        if (at_kw("None") || at_kw("True") || at_kw("False")) {
            ConstantValue v;
            v.type = at_kw("None") ? ConstantValue::Type::None : at_kw("True") ? ConstantValue::Type::True : ConstantValue::Type::False;
            advance();
            return make_constant(v, {begin, prev_end_});
        }
        if (at_identifier() && at_op(".", 1)) return parse_dotted_value();
        fail("invalid syntax");
    }

    SyntaxNode parse_dotted_value() {
        std::size_t begin = here();
        SyntaxNode cur = node(NodeKind::Name, begin);
        cur.name = expect_identifier();
        finish(cur);
        while (accept_op(".")) {
            SyntaxNode attr = node(NodeKind::Attribute, begin);
            attr.name = expect_identifier();
            attr.field(fld::value).push_back(std::move(cur));
            cur = std::move(finish(attr));
        }
        return cur;
    }

    SyntaxNode parse_closed_pattern() {
        std::size_t begin = here();
        const Token& t = tok();
        if (t.type == TokenType::Number || t.is_op("-") || t.type == TokenType::String) {
            SyntaxNode v = node(NodeKind::MatchValue, begin);
            v.field(fld::value).push_back(parse_pattern_value_expr());
            return finish(v);
        }
        if (at_kw("None") || at_kw("True") || at_kw("False")) {
            SyntaxNode s = node(NodeKind::MatchSingleton, begin);
            s.value.type = at_kw("None") ? ConstantValue::Type::None : at_kw("True") ? ConstantValue::Type::True : ConstantValue::Type::False;
            advance();
            return finish(s);
        }
        if (at_identifier()) {
            // A leading "_" is always the wildcard, so "_.x" and "_(...)"
            // fail just after it, as in CPython.
            if (!t.is_name("_") && (at_op(".", 1) || at_op("(", 1))) {
                SyntaxNode target = at_op(".", 1) ? parse_dotted_value() : [&] {
                    SyntaxNode nm = node(NodeKind::Name, begin);
                    nm.name = expect_identifier();
                    return finish(nm);
                }();
                if (at_op("(")) return parse_class_pattern(std::move(target), begin);
                SyntaxNode v = node(NodeKind::MatchValue, begin);
                v.field(fld::value).push_back(std::move(target));
                return finish(v);
            }
            SyntaxNode as = node(NodeKind::MatchAs, begin);
            std::string name = expect_identifier();
            if (name != "_") as.name = std::move(name);
            return finish(as);
        }
        if (at_op("(")) {
            advance();
            if (accept_op(")")) {
                SyntaxNode seq = node(NodeKind::MatchSequence, begin);
                return finish(seq);
            }
            SyntaxNode first = parse_maybe_star_pattern();
            if (accept_op(")")) {
                if (first.kind == NodeKind::MatchStar) {
                    SyntaxNode seq = node(NodeKind::MatchSequence, begin);
                    seq.field(fld::patterns).push_back(std::move(first));
                    return finish(seq);
                }
                return first;
            }
            SyntaxNode seq = node(NodeKind::MatchSequence, begin);
            seq.field(fld::patterns).push_back(std::move(first));
            while (accept_op(",")) {
                if (at_op(")")) break;
                seq.field(fld::patterns).push_back(parse_maybe_star_pattern());
            }
            expect_op(")");
            return finish(seq);
        }
        if (at_op("[")) {
            advance();
            SyntaxNode seq = node(NodeKind::MatchSequence, begin);
            while (!at_op("]")) {
                seq.field(fld::patterns).push_back(parse_maybe_star_pattern());
                if (!accept_op(",")) break;
            }
            expect_op("]");
            return finish(seq);
        }
        if (at_op("{")) return parse_mapping_pattern();
        fail("invalid syntax");
    }

    SyntaxNode parse_mapping_pattern() {
        SyntaxNode m = node(NodeKind::MatchMapping, here());
        advance();
        while (!at_op("}")) {
            if (accept_op("**")) {
                m.name = expect_identifier();
                accept_op(",");
                break;
            }
            m.field(fld::map_keys).push_back(parse_pattern_value_expr());
            expect_op(":");
            m.field(fld::map_patterns).push_back(parse_pattern());
            if (!accept_op(",")) break;
        }
        expect_op("}");
        return finish(m);
    }

    SyntaxNode parse_class_pattern(SyntaxNode cls, std::size_t begin) {
        SyntaxNode c = node(NodeKind::MatchClass, begin);
        c.field(fld::class_cls).push_back(std::move(cls));
        expect_op("(");
        bool keywords = false;
        while (!at_op(")")) {
            if (at_identifier() && at_op("=", 1)) {
                keywords = true;
                c.names.push_back(expect_identifier());
                advance();
                c.field(fld::class_kwd_patterns).push_back(parse_pattern());
            } else {
                if (keywords) fail("positional patterns follow keyword patterns");
                c.field(fld::class_patterns).push_back(parse_pattern());
            }
            if (!accept_op(",")) break;
        }
        expect_op(")");
        return finish(c);
    }

    // ------------------------------------------------------------ expressions

    SyntaxNode parse_star_expressions() {
        std::size_t begin = here();
        SyntaxNode first = parse_star_expression();
        if (!at_op(",")) return first;
        SyntaxNode t = node(NodeKind::Tuple, begin);
        t.field(fld::elts).push_back(std::move(first));
        while (accept_op(",")) {
            if (!starts_expression()) break;
            t.field(fld::elts).push_back(parse_star_expression());
        }
        return finish(t);
    }

    SyntaxNode parse_star_expression() {
        if (at_op("*")) {
            SyntaxNode s = node(NodeKind::Starred, here());
            advance();
            s.field(fld::value).push_back(parse_bitwise_or());
            return finish(s);
        }
        return parse_expression();
    }

    SyntaxNode parse_star_named_expression() {
        if (at_op("*")) {
            SyntaxNode s = node(NodeKind::Starred, here());
            advance();
            s.field(fld::value).push_back(parse_bitwise_or());
            return finish(s);
        }
        return parse_named_expression();
    }

    SyntaxNode parse_named_expression() {
        if (at_identifier() && at_op(":=", 1)) {
            std::size_t begin = here();
            SyntaxNode target = node(NodeKind::Name, begin);
            target.name = std::string(advance().text);
            target.ctx = Context::Store;
            finish(target);
            advance();
            SyntaxNode n = node(NodeKind::NamedExpr, begin);
            n.field(fld::named_target).push_back(std::move(target));
            n.field(fld::named_value).push_back(parse_expression());
            return finish(n);
        }
        SyntaxNode e = parse_expression();
        if (at_op(":=")) fail_at(e.span.begin, "cannot use assignment expressions with " + std::string(describe(e)));
        return e;
    }

    SyntaxNode parse_expression() {
        NestingGuard guard(*this);
        if (at_kw("lambda")) return parse_lambda();
        std::size_t begin = here();
        SyntaxNode body = parse_disjunction();
        if (!at_kw("if")) return body;
        advance();
        SyntaxNode n = node(NodeKind::IfExp, begin);
        n.field(fld::test).push_back(parse_disjunction());
        if (!accept_kw("else")) fail_at(begin, "expected 'else' after 'if' expression");
        n.field(fld::cond_body).push_back(std::move(body));
        n.field(fld::cond_orelse).push_back(parse_expression());
        return finish(n);
    }

    SyntaxNode parse_lambda() {
        std::size_t begin = here();
        advance();
        SyntaxNode n = node(NodeKind::Lambda, begin);
        n.field(fld::lambda_args).push_back(parse_parameters(":", false));
        expect_op(":");
        n.field(fld::lambda_body).push_back(parse_expression());
        return finish(n);
    }

    SyntaxNode parse_bool_chain(std::string_view kw, Operator op, SyntaxNode (Parser::*next)()) {
        std::size_t begin = here();
        SyntaxNode first = (this->*next)();
        if (!at_kw(kw)) return first;
        SyntaxNode n = node(NodeKind::BoolOp, begin);
        n.op = op;
        n.field(fld::bool_values).push_back(std::move(first));
        while (accept_kw(kw)) {
            if (n.field(fld::bool_values).size() > kMaxChain) fail("expression too long");
            n.field(fld::bool_values).push_back((this->*next)());
        }
        return finish(n);
    }

    SyntaxNode parse_disjunction() { return parse_bool_chain("or", Operator::Or, &Parser::parse_conjunction); }
    SyntaxNode parse_conjunction() { return parse_bool_chain("and", Operator::And, &Parser::parse_inversion); }

    SyntaxNode parse_inversion() {
        if (at_kw("not")) {
            NestingGuard guard(*this);
            SyntaxNode n = node(NodeKind::UnaryOp, here());
            advance();
            n.op = Operator::Not;
            n.field(fld::operand).push_back(parse_inversion());
            return finish(n);
        }
        return parse_comparison();
    }

    std::optional<Operator> comparison_operator() {
        const Token& t = tok();
        if (t.type == TokenType::Op) {
            if (t.text == "==") return Operator::Eq;
            if (t.text == "!=") return Operator::NotEq;
            if (t.text == "<") return Operator::Lt;
            if (t.text == "<=") return Operator::LtE;
            if (t.text == ">") return Operator::Gt;
            if (t.text == ">=") return Operator::GtE;
            return std::nullopt;
        }
        if (at_kw("in")) return Operator::In;
        if (at_kw("not") && at_kw("in", 1)) return Operator::NotIn;
        if (at_kw("is")) return at_kw("not", 1) ? Operator::IsNot : Operator::Is;
        return std::nullopt;
    }

    SyntaxNode parse_comparison() {
        std::size_t begin = here();
        SyntaxNode left = parse_bitwise_or();
        auto op = comparison_operator();
        if (!op) return left;
        SyntaxNode n = node(NodeKind::Compare, begin);
        n.field(fld::cmp_left).push_back(std::move(left));
        while (op) {
            advance();
            if (*op == Operator::NotIn || *op == Operator::IsNot) advance();
            n.ops.push_back(*op);
            if (n.ops.size() > kMaxChain) fail("expression too long");
            n.field(fld::cmp_comparators).push_back(parse_bitwise_or());
            op = comparison_operator();
        }
        return finish(n);
    }

    template <std::size_t N>
    SyntaxNode parse_binary_chain(const Binary (&ops)[N], SyntaxNode (Parser::*next)()) {
        std::size_t begin = here();
        SyntaxNode left = (this->*next)();
        std::size_t count = 0;
        while (true) {
            const Binary* match = nullptr;
            for (const auto& b : ops) {
                if (at_op(b.token)) match = &b;
            }
            if (!match) return left;
            if (++count > kMaxChain) fail("expression too long");
            advance();
            SyntaxNode n = node(NodeKind::BinOp, begin);
            n.op = match->op;
            n.field(fld::left).push_back(std::move(left));
            n.field(fld::right).push_back((this->*next)());
            left = std::move(finish(n));
        }
    }

    SyntaxNode parse_bitwise_or() {
        static constexpr Binary ops[] = {{"|", Operator::BitOr}};
        return parse_binary_chain(ops, &Parser::parse_bitwise_xor);
    }
    SyntaxNode parse_bitwise_xor() {
        static constexpr Binary ops[] = {{"^", Operator::BitXor}};
        return parse_binary_chain(ops, &Parser::parse_bitwise_and);
    }
    SyntaxNode parse_bitwise_and() {
        static constexpr Binary ops[] = {{"&", Operator::BitAnd}};
        return parse_binary_chain(ops, &Parser::parse_shift);
    }
    SyntaxNode parse_shift() { return parse_binary_chain(kShiftOps, &Parser::parse_sum); }
    SyntaxNode parse_sum() { return parse_binary_chain(kSumOps, &Parser::parse_term); }
    SyntaxNode parse_term() { return parse_binary_chain(kTermOps, &Parser::parse_factor); }

    SyntaxNode parse_factor() {
        Operator op = Operator::None;
        if (at_op("+")) op = Operator::UAdd;
        else if (at_op("-")) op = Operator::USub;
        else if (at_op("~")) op = Operator::Invert;
        if (op == Operator::None) return parse_power();
        NestingGuard guard(*this);
        SyntaxNode n = node(NodeKind::UnaryOp, here());
        advance();
        n.op = op;
        n.field(fld::operand).push_back(parse_factor());
        return finish(n);
    }

    SyntaxNode parse_power() {
        std::size_t begin = here();
        SyntaxNode base = parse_await_primary();
        if (!at_op("**")) return base;
        advance();
        SyntaxNode n = node(NodeKind::BinOp, begin);
        n.op = Operator::Pow;
        n.field(fld::left).push_back(std::move(base));
        n.field(fld::right).push_back(parse_factor());
        return finish(n);
    }

    SyntaxNode parse_await_primary() {
        if (at_kw("await")) {
            SyntaxNode n = node(NodeKind::Await, here());
            advance();
            n.field(fld::value).push_back(parse_primary());
            return finish(n);
        }
        return parse_primary();
    }

    SyntaxNode parse_primary() {
        std::size_t begin = here();
        SyntaxNode cur = parse_atom();
        std::size_t count = 0;
        while (true) {
            if (++count > kMaxChain) fail("expression too long");
            if (at_op(".")) {
                advance();
                SyntaxNode n = node(NodeKind::Attribute, begin);
                n.name = expect_identifier();
                n.field(fld::value).push_back(std::move(cur));
                cur = std::move(finish(n));
            } else if (at_op("(")) {
                std::size_t paren = here();
                advance();
                SyntaxNode n = node(NodeKind::Call, begin);
                n.field(fld::call_func).push_back(std::move(cur));
                parse_call_arguments(n.field(fld::call_args), n.field(fld::call_keywords), true, paren);
                expect_op(")");
                finish(n);
                // A lone generator argument spans the call parentheses.
                auto& args = n.field(fld::call_args);
                if (args.size() == 1 && args.front().kind == NodeKind::GeneratorExp && args.front().span.begin == paren) {
                    args.front().span.end = prev_end_;
                }
                cur = std::move(n);
            } else if (at_op("[")) {
                advance();
                SyntaxNode n = node(NodeKind::Subscript, begin);
                n.field(fld::sub_value).push_back(std::move(cur));
                n.field(fld::sub_slice).push_back(parse_slices());
                expect_op("]");
                cur = std::move(finish(n));
            } else {
                return cur;
            }
        }
    }

    void parse_call_arguments(Nodes& args, Nodes& keywords, bool allow_genexp, std::size_t paren = 0) {
        bool seen_keyword = false;
        bool seen_double_star = false;
        while (!at_op(")")) {
            std::size_t begin = here();
            if (at_op("*")) {
                if (seen_double_star) fail("iterable argument unpacking follows keyword argument unpacking");
                advance();
                SyntaxNode s = node(NodeKind::Starred, begin);
                s.field(fld::value).push_back(parse_expression());
                args.push_back(std::move(finish(s)));
            } else if (at_op("**")) {
                advance();
                SyntaxNode k = node(NodeKind::keyword, begin);
                k.field(fld::value).push_back(parse_expression());
                keywords.push_back(std::move(finish(k)));
                seen_double_star = true;
            } else if (at_identifier() && at_op("=", 1)) {
                SyntaxNode k = node(NodeKind::keyword, begin);
                k.name = std::string(advance().text);
                advance();
                k.field(fld::value).push_back(parse_expression());
                keywords.push_back(std::move(finish(k)));
                seen_keyword = true;
            } else {
                SyntaxNode e = parse_named_expression();
                if (at_op("=")) {
                    if (e.kind == NodeKind::Constant &&
                        (e.value.type == ConstantValue::Type::True || e.value.type == ConstantValue::Type::False ||
                         e.value.type == ConstantValue::Type::None)) {
                        fail_at(begin, "cannot assign to " + std::string(describe(e)));
                    }
                    fail_at(begin, "expression cannot contain assignment, perhaps you meant \"==\"?");
                }
                if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
                    if (!allow_genexp) fail("invalid syntax");
                    bool alone = args.empty() && keywords.empty();
                    SyntaxNode g = node(NodeKind::GeneratorExp, paren);
                    g.field(fld::comp_elt).push_back(std::move(e));
                    g.field(fld::comp_generators) = parse_comprehension_clauses();
                    finish(g);
                    if (!alone || !at_op(")")) fail_at(begin, "Generator expression must be parenthesized");
                    args.push_back(std::move(g));
                    continue;
                }
                if (seen_double_star) fail_at(begin, "positional argument follows keyword argument unpacking");
                if (seen_keyword) fail_at(begin, "positional argument follows keyword argument");
                args.push_back(std::move(e));
            }
            if (!accept_op(",")) break;
        }
    }

    SyntaxNode parse_slices() {
        std::size_t begin = here();
        SyntaxNode first = parse_slice();
        if (!at_op(",")) return first;
        SyntaxNode t = node(NodeKind::Tuple, begin);
        t.field(fld::elts).push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("]")) break;
            t.field(fld::elts).push_back(parse_slice());
        }
        return finish(t);
    }

    SyntaxNode parse_slice() {
        std::size_t begin = here();
        std::optional<SyntaxNode> lower;
        if (!at_op(":")) {
            SyntaxNode e = parse_named_expression();
            if (!at_op(":")) return e;
            lower = std::move(e);
        }
        advance();  // ':'
        SyntaxNode s = node(NodeKind::Slice, begin);
        if (lower) s.field(fld::slice_lower).push_back(std::move(*lower));
        if (!at_op(":") && !at_op(",") && !at_op("]")) s.field(fld::slice_upper).push_back(parse_expression());
        if (accept_op(":")) {
            if (!at_op(",") && !at_op("]")) s.field(fld::slice_step).push_back(parse_expression());
        }
        return finish(s);
    }

    Nodes parse_comprehension_clauses() {
        Nodes gens;
        while (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            SyntaxNode c = node(NodeKind::comprehension, here());
            if (accept_kw("async")) c.is_async = true;
            expect_kw("for");
            c.field(fld::gen_target).push_back(parse_target_list());
            expect_kw("in");
            c.field(fld::gen_iter).push_back(parse_disjunction());
            while (accept_kw("if")) c.field(fld::gen_ifs).push_back(parse_disjunction());
            gens.push_back(std::move(finish(c)));
        }
        return gens;
    }

    SyntaxNode parse_yield() {
        std::size_t begin = here();
        advance();
        if (accept_kw("from")) {
            SyntaxNode n = node(NodeKind::YieldFrom, begin);
            n.field(fld::value).push_back(parse_expression());
            return finish(n);
        }
        SyntaxNode n = node(NodeKind::Yield, begin);
        if (starts_expression()) n.field(fld::value).push_back(parse_star_expressions());
        return finish(n);
    }

    SyntaxNode parse_atom() {
        std::size_t begin = here();
        const Token& t = tok();
        switch (t.type) {
            case TokenType::Number: {
                advance();
                return make_constant(number_value(t.text), {t.begin, t.end});
            }
            case TokenType::String: return parse_strings();
            case TokenType::Name: {
                if (t.text == "True" || t.text == "False" || t.text == "None") {
                    ConstantValue v;
                    v.type = t.text == "True" ? ConstantValue::Type::True : t.text == "False" ? ConstantValue::Type::False : ConstantValue::Type::None;
                    advance();
                    return make_constant(v, {t.begin, t.end});
                }
                if (is_keyword(t.text)) fail("invalid syntax");
                SyntaxNode n = node(NodeKind::Name, begin);
                n.name = std::string(t.text);
                advance();
                return finish(n);
            }
            case TokenType::Op: break;
            default: fail("invalid syntax");
        }
        if (t.text == "...") {
            advance();
            ConstantValue v;
            v.type = ConstantValue::Type::Ellipsis;
            return make_constant(v, {t.begin, t.end});
        }
        if (t.text == "(") return parse_paren();
        if (t.text == "[") return parse_list();
        if (t.text == "{") return parse_brace();
        fail("invalid syntax");
    }

    SyntaxNode parse_paren() {
        NestingGuard guard(*this);
        std::size_t begin = here();
        advance();
        if (accept_op(")")) {
            SyntaxNode t = node(NodeKind::Tuple, begin);
            return finish(t);
        }
        if (at_kw("yield")) {
            SyntaxNode y = parse_yield();
            expect_op(")");
            return y;
        }
        SyntaxNode first = parse_star_named_expression();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            if (first.kind == NodeKind::Starred) fail_at(first.span.begin, "iterable unpacking cannot be used in comprehension");
            SyntaxNode g = node(NodeKind::GeneratorExp, begin);
            g.field(fld::comp_elt).push_back(std::move(first));
            g.field(fld::comp_generators) = parse_comprehension_clauses();
            expect_op(")");
            return finish(g);
        }
        if (accept_op(")")) {
            if (first.kind == NodeKind::Starred) fail_at(first.span.begin, "cannot use starred expression here");
            return first;
        }
        if (!at_op(",")) fail("invalid syntax");
        SyntaxNode t = node(NodeKind::Tuple, begin);
        t.field(fld::elts).push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(")")) break;
            t.field(fld::elts).push_back(parse_star_named_expression());
        }
        expect_op(")");
        return finish(t);
    }

    SyntaxNode parse_list() {
        NestingGuard guard(*this);
        std::size_t begin = here();
        advance();
        if (accept_op("]")) {
            SyntaxNode l = node(NodeKind::List, begin);
            return finish(l);
        }
        SyntaxNode first = parse_star_named_expression();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            if (first.kind == NodeKind::Starred) fail_at(first.span.begin, "iterable unpacking cannot be used in comprehension");
            SyntaxNode c = node(NodeKind::ListComp, begin);
            c.field(fld::comp_elt).push_back(std::move(first));
            c.field(fld::comp_generators) = parse_comprehension_clauses();
            expect_op("]");
            return finish(c);
        }
        SyntaxNode l = node(NodeKind::List, begin);
        l.field(fld::elts).push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("]")) break;
            l.field(fld::elts).push_back(parse_star_named_expression());
        }
        expect_op("]");
        return finish(l);
    }

    SyntaxNode parse_brace() {
        NestingGuard guard(*this);
        std::size_t begin = here();
        advance();
        if (accept_op("}")) {
            SyntaxNode d = node(NodeKind::Dict, begin);
            return finish(d);
        }
        if (at_op("**")) return parse_dict_rest(begin, std::nullopt);
        SyntaxNode first = parse_star_named_expression();
        if (at_op(":") && first.kind != NodeKind::Starred) {
            if (first.kind == NodeKind::NamedExpr) fail_at(first.span.begin, "invalid syntax");
            advance();
            SyntaxNode value = parse_expression();
            if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
                SyntaxNode c = node(NodeKind::DictComp, begin);
                c.field(fld::dictcomp_key).push_back(std::move(first));
                c.field(fld::dictcomp_value).push_back(std::move(value));
                c.field(fld::dictcomp_generators) = parse_comprehension_clauses();
                expect_op("}");
                return finish(c);
            }
            return parse_dict_rest(begin, std::make_pair(std::move(first), std::move(value)));
        }
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            if (first.kind == NodeKind::Starred) fail_at(first.span.begin, "iterable unpacking cannot be used in comprehension");
            SyntaxNode c = node(NodeKind::SetComp, begin);
            c.field(fld::comp_elt).push_back(std::move(first));
            c.field(fld::comp_generators) = parse_comprehension_clauses();
            expect_op("}");
            return finish(c);
        }
        SyntaxNode s = node(NodeKind::Set, begin);
        s.field(fld::elts).push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("}")) break;
            s.field(fld::elts).push_back(parse_star_named_expression());
        }
        expect_op("}");
        return finish(s);
    }

    SyntaxNode parse_dict_rest(std::size_t begin, std::optional<std::pair<SyntaxNode, SyntaxNode>> first) {
        SyntaxNode d = node(NodeKind::Dict, begin);
        auto& keys = d.field(fld::dict_keys);
        auto& values = d.field(fld::dict_values);
        bool need_item = !first.has_value();
        if (first) {
            keys.push_back(std::move(first->first));
            values.push_back(std::move(first->second));
        }
        while (true) {
            if (!need_item) {
                if (!accept_op(",")) break;
                if (at_op("}")) break;
            }
            need_item = false;
            if (accept_op("**")) {
                keys.push_back(SyntaxNode(NodeKind::Absent));
                values.push_back(parse_bitwise_or());
            } else {
                keys.push_back(parse_expression());
                expect_op(":");
                values.push_back(parse_expression());
            }
        }
        expect_op("}");
        return finish(d);
    }

    // ---------------------------------------------------------------- strings

    struct StringToken {
        const Token* token;
        bool is_bytes = false;
        bool is_raw = false;
        bool is_f = false;
        std::string_view body;
        std::size_t body_offset = 0;
    };

    // Newlines inside literals read as "\n" whatever the file's line endings.
    std::string_view normalize_newlines(std::string_view body) {
        if (body.find('\r') == std::string_view::npos) return body;
        std::string out;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (body[i] == '\r') {
                out += '\n';
                if (i + 1 < body.size() && body[i + 1] == '\n') ++i;
            } else {
                out += body[i];
            }
        }
        return owned_.emplace_back(std::move(out));
    }

    StringToken split_string(const Token& t) {
        StringToken s{&t};
        std::size_t q = t.text.find_first_of("'\"");
        for (char c : t.text.substr(0, q)) {
            if (c == 'b' || c == 'B') s.is_bytes = true;
            if (c == 'r' || c == 'R') s.is_raw = true;
            if (c == 'f' || c == 'F') s.is_f = true;
        }
        char quote = t.text[q];
        std::size_t qlen = t.text.size() - q >= 6 && t.text.compare(q, 3, std::string(3, quote)) == 0 ? 3 : 1;
        s.body = normalize_newlines(t.text.substr(q + qlen, t.text.size() - q - 2 * qlen));
        s.body_offset = t.begin + q + qlen;
        return s;
    }

    struct FState {
        std::optional<std::string> last_str;
        Nodes values;

        void concat(std::string s) {
            if (s.empty()) return;
            if (last_str) *last_str += s;
            else last_str = std::move(s);
        }
    };

    void flush_literal(FState& st, Span span, bool u) {
        if (!st.last_str) return;
        ConstantValue v;
        v.type = ConstantValue::Type::Str;
        v.text = std::move(*st.last_str);
        v.u_prefix = u;
        st.values.push_back(make_constant(std::move(v), span));
        st.last_str.reset();
    }

    SyntaxNode parse_strings() {
        std::vector<StringToken> parts;
        while (tok().type == TokenType::String) {
            parts.push_back(split_string(tok()));
            advance();
        }
        Span span{parts.front().token->begin, parts.back().token->end};
        bool any_bytes = false;
        bool any_str = false;
        bool any_f = false;
        for (const auto& p : parts) {
            (p.is_bytes ? any_bytes : any_str) = true;
            any_f = any_f || p.is_f;
        }
        if (any_bytes && any_str) fail_at(span.begin, "cannot mix bytes and nonbytes literals");
        bool u = parts.front().token->text.front() == 'u';
        if (any_bytes) {
            ConstantValue v;
            v.type = ConstantValue::Type::Bytes;
            for (const auto& p : parts) v.text += decode_bytes_escapes(p.body, p.body_offset, p.is_raw);
            return make_constant(std::move(v), span);
        }
        for (const auto& p : parts) {
            if (!p.is_raw && !unicode::is_valid_utf8(p.body)) fail_at(p.body_offset, "invalid UTF-8");
        }
        if (!any_f) {
            ConstantValue v;
            v.type = ConstantValue::Type::Str;
            v.u_prefix = u;
            for (const auto& p : parts) {
                v.text += p.is_raw ? std::string(p.body) : decode_str_escapes(p.body, p.body_offset);
            }
            return make_constant(std::move(v), span);
        }
        FState st;
        for (const auto& p : parts) {
            if (!p.is_f) {
                st.concat(p.is_raw ? std::string(p.body) : decode_str_escapes(p.body, p.body_offset));
                continue;
            }
            std::size_t i = 0;
            fstring_concat(p, i, 0, st, span, u);
        }
        flush_literal(st, span, u);
        SyntaxNode js(NodeKind::JoinedStr, span);
        js.field(fld::js_values) = std::move(st.values);
        return js;
    }

    // Returns true when the literal ended on a doubled brace.
    bool fstring_find_literal(const StringToken& p, std::size_t& i, int recurse, std::string& literal) {
        std::string_view body = p.body;
        std::size_t end = body.size();
        std::size_t s = i;
        std::size_t start = s;
        bool doubled = false;
        while (s < end) {
            char ch = body[s++];
            if (!p.is_raw && ch == '\\' && s < end) {
                ch = body[s++];
                if (ch == 'N') {
                    if (s < end && body[s++] == '{') {
                        while (s < end && body[s++] != '}') {
                        }
                    }
                    continue;
                }
            }
            if (ch == '{' || ch == '}') {
                if (recurse == 0) {
                    if (s < end && body[s] == ch) {
                        i = s + 1;
                        doubled = true;
                        break;
                    }
                    if (ch == '}') fail_at(p.body_offset + s - 1, "f-string: single '}' is not allowed");
                }
                --s;
                break;
            }
        }
        if (!doubled) i = s;
        std::string_view text = body.substr(start, s - start);
        literal = p.is_raw ? std::string(text) : decode_str_escapes(text, p.body_offset + start);
        return doubled;
    }

    void fstring_concat(const StringToken& p, std::size_t& i, int recurse, FState& st, Span span, bool u) {
        std::string_view body = p.body;
        while (true) {
            std::string literal;
            bool doubled = fstring_find_literal(p, i, recurse, literal);
            st.concat(std::move(literal));
            if (doubled) continue;
            if (i >= body.size() || body[i] == '}') break;
            std::string expr_text;
            SyntaxNode fv = fstring_find_expr(p, i, recurse, expr_text, span, u);
            st.concat(std::move(expr_text));
            flush_literal(st, span, u);
            st.values.push_back(std::move(fv));
        }
        if (recurse != 0 && (i >= body.size() || body[i] != '}')) fail_at(p.body_offset + i, "f-string: expecting '}'");
    }

    SyntaxNode fstring_find_expr(const StringToken& p, std::size_t& i, int recurse, std::string& expr_text, Span span, bool u) {
        std::string_view body = p.body;
        std::size_t end = body.size();
        auto err = [&](std::size_t at, const std::string& msg) { fail_at(p.body_offset + std::min(at, end), msg); };
        if (recurse >= 2) err(i, "f-string: expressions nested too deeply");
        ++i;  // '{'
        std::size_t expr_start = i;
        char quote = 0;
        int string_type = 0;
        std::vector<char> parens;
        for (; i < end; ++i) {
            char ch = body[i];
            if (ch == '\\') err(i, "f-string expression part cannot include a backslash");
            if (quote) {
                if (ch == quote) {
                    if (string_type == 3) {
                        if (i + 2 < end && body[i + 1] == ch && body[i + 2] == ch) {
                            i += 2;
                            string_type = 0;
                            quote = 0;
                        }
                    } else {
                        string_type = 0;
                        quote = 0;
                    }
                }
                continue;
            }
            if (ch == '\'' || ch == '"') {
                if (i + 2 < end && body[i + 1] == ch && body[i + 2] == ch) {
                    string_type = 3;
                    i += 2;
                } else {
                    string_type = 1;
                }
                quote = ch;
            } else if (ch == '[' || ch == '{' || ch == '(') {
                if (parens.size() >= 200) err(i, "f-string: too many nested parenthesis");
                parens.push_back(ch);
            } else if (ch == '#') {
                err(i, "f-string expression part cannot include '#'");
            } else if (parens.empty() && (ch == '!' || ch == ':' || ch == '}' || ch == '=' || ch == '>' || ch == '<')) {
                if (i + 1 < end) {
                    char next = body[i + 1];
                    if ((ch == '!' && next == '=') || (ch == '=' && next == '=') || (ch == '<' && next == '=') ||
                        (ch == '>' && next == '=')) {
                        ++i;
                        continue;
                    }
                }
                if (ch == '>' || ch == '<') continue;
                break;
            } else if (ch == ']' || ch == '}' || ch == ')') {
                if (parens.empty()) err(i, std::string("f-string: unmatched '") + ch + "'");
                char open = parens.back();
                parens.pop_back();
                if (!((open == '(' && ch == ')') || (open == '[' && ch == ']') || (open == '{' && ch == '}'))) {
                    err(i, std::string("f-string: closing parenthesis '") + ch + "' does not match opening parenthesis '" + open + "'");
                }
            }
        }
        std::size_t expr_end = i;
        if (quote) err(i, "f-string: unterminated string");
        if (!parens.empty()) err(i, std::string("f-string: unmatched '") + parens.back() + "'");
        if (i >= end) err(i, "f-string: expecting '}'");

        SyntaxNode value = compile_fstring_expr(p, expr_start, expr_end);

        SyntaxNode fv(NodeKind::FormattedValue, span);
        bool debug = false;
        if (body[i] == '=') {
            ++i;
            while (i < end && is_py_space(body[i])) ++i;
            if (i >= end) err(i, "f-string: expecting '}'");
            expr_text = std::string(body.substr(expr_start, i - expr_start));
            debug = true;
        }
        if (body[i] == '!') {
            ++i;
            if (i >= end) err(i, "f-string: expecting '}'");
            char conv = body[i++];
            if (conv != 's' && conv != 'r' && conv != 'a') {
                err(i - 1, "f-string: invalid conversion character: expected 's', 'r', or 'a'");
            }
            fv.conversion = conv;
        }
        if (i >= end) err(i, "f-string: expecting '}'");
        bool has_spec = false;
        if (body[i] == ':') {
            ++i;
            if (i >= end) err(i, "f-string: expecting '}'");
            FState spec;
            fstring_concat(p, i, recurse + 1, spec, span, u);
            flush_literal(spec, span, u);
            SyntaxNode js(NodeKind::JoinedStr, span);
            js.field(fld::js_values) = std::move(spec.values);
            fv.field(fld::fv_format_spec).push_back(std::move(js));
            has_spec = true;
        }
        if (i >= end || body[i] != '}') err(i, "f-string: expecting '}'");
        ++i;
        if (debug && !has_spec && fv.conversion == -1) fv.conversion = 'r';
        fv.field(fld::fv_value).push_back(std::move(value));
        return fv;
    }

    SyntaxNode compile_fstring_expr(const StringToken& p, std::size_t start, std::size_t end) {
        std::string_view text = p.body.substr(start, end - start);
        if (std::all_of(text.begin(), text.end(), is_py_space)) {
            fail_at(p.body_offset + start, "f-string: empty expression not allowed");
        }
        std::string sub = "(" + std::string(text) + ")";
        std::size_t base = p.body_offset + start;
        auto shift = [&](std::size_t off) { return off == 0 ? base - 1 : base + off - 1; };
        SyntaxNode e;
        try {
            Parser inner(sub, tokenize(sub));
            inner.nesting_ = nesting_;
            e = inner.parse_fstring_expression();
        } catch (const SyntaxError& error) {
            throw SyntaxError(shift(std::min(error.offset(), sub.size() - 1)), std::string("f-string: ") + error.what());
        }
        std::size_t lo = base - 1;
        std::size_t hi = p.body_offset + end + 1;
        shift_spans(e, shift, lo, hi);
        return e;
    }

    template <typename F>
    static void shift_spans(SyntaxNode& n, const F& shift, std::size_t lo, std::size_t hi) {
        n.span.begin = std::clamp(shift(n.span.begin), lo, hi);
        n.span.end = std::clamp(shift(n.span.end), n.span.begin, hi);
        for (auto& f : n.fields) {
            for (auto& c : f) shift_spans(c, shift, lo, hi);
        }
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::deque<std::string> owned_;
    std::size_t pos_ = 0;
    std::size_t prev_end_ = 0;
    int nesting_ = 0;
};

std::pair<std::size_t, std::size_t> line_and_column(std::string_view source, std::size_t offset) {
    std::size_t line = 1;
    std::size_t line_start = 0;
    offset = std::min(offset, source.size());
    for (std::size_t i = 0; i < offset; ++i) {
        if (source[i] == '\n' || (source[i] == '\r' && (i + 1 >= source.size() || source[i + 1] != '\n'))) {
            ++line;
            line_start = i + 1;
        }
    }
    return {line, offset - line_start + 1};
}

}  // namespace
}  // namespace detail

ParseResult parse(std::string_view source, std::string source_id) {
    auto failure = [&](std::size_t offset, std::string message) {
        auto [line, column] = detail::line_and_column(source, offset);
        return ParseResult(ParseFailure{offset, line, column, std::move(message)});
    };
    if (auto bad = unicode::first_invalid_utf8(source)) return failure(*bad, "invalid UTF-8 in source");
    try {
        detail::Parser parser(source, detail::tokenize(source));
        SyntaxTree tree{parser.parse_module(), std::move(source_id)};
        return ParseResult(std::move(tree));
    } catch (const detail::SyntaxError& e) {
        return failure(e.offset(), e.what());
    }
}

}  // namespace codecorpus::syntax
