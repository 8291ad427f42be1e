// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/syntax/unparse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "codecorpus/common/unicode.hpp"

namespace codecorpus::syntax {
namespace {

using Quotes = std::vector<std::string_view>;

const Quotes kAllQuotes = {"'", "\"", "\"\"\"", "'''"};
const Quotes kMultiQuotes = {"\"\"\"", "'''"};

constexpr std::string_view kInf = "1e309";

enum Prec : int {
    TUPLE = 1, YIELD, TEST, OR, AND, NOT, CMP, EXPR, BXOR, BAND, SHIFT, ARITH, TERM, FACTOR, POWER, AWAIT, ATOM,
};
constexpr int BOR = EXPR;

int next(int p) { return std::min(p + 1, static_cast<int>(ATOM)); }

// Escape used by the 'unicode_escape' codec for one code point.
void append_unicode_escape(std::string& out, char32_t c) {
    switch (c) {
        case U'\\': out += "\\\\"; return;
        case U'\t': out += "\\t"; return;
        case U'\n': out += "\\n"; return;
        case U'\r': out += "\\r"; return;
        default: break;
    }
    if (c < 0x20 || (c >= 0x7f && c < 0x100)) {
        out += fmt::format("\\x{:02x}", static_cast<unsigned>(c));
    } else if (c < 0x100) {
        out += static_cast<char>(c);
    } else if (c < 0x10000) {
        out += fmt::format("\\u{:04x}", static_cast<unsigned>(c));
    } else {
        out += fmt::format("\\U{:08x}", static_cast<unsigned>(c));
    }
}

std::string repr_str(std::u32string_view s) {
    bool has_single = s.find(U'\'') != std::u32string_view::npos;
    bool has_double = s.find(U'"') != std::u32string_view::npos;
    char32_t quote = has_single && !has_double ? U'"' : U'\'';
    std::string out;
    out += static_cast<char>(quote);
    for (char32_t c : s) {
        if (c == quote || c == U'\\') {
            out += '\\';
            out += static_cast<char>(c);
        } else if (c == U'\t') {
            out += "\\t";
        } else if (c == U'\n') {
            out += "\\n";
        } else if (c == U'\r') {
            out += "\\r";
        } else if (c < 0x20 || c == 0x7f) {
            out += fmt::format("\\x{:02x}", static_cast<unsigned>(c));
        } else if (c < 0x7f) {
            out += static_cast<char>(c);
        } else if (unicode::is_printable(c)) {
            unicode::append_utf8(out, c);
        } else if (c < 0x100) {
            out += fmt::format("\\x{:02x}", static_cast<unsigned>(c));
        } else if (c < 0x10000) {
            out += fmt::format("\\u{:04x}", static_cast<unsigned>(c));
        } else {
            out += fmt::format("\\U{:08x}", static_cast<unsigned>(c));
        }
    }
    out += static_cast<char>(quote);
    return out;
}

std::string repr_bytes(std::string_view s) {
    bool has_single = s.find('\'') != std::string_view::npos;
    bool has_double = s.find('"') != std::string_view::npos;
    char quote = has_single && !has_double ? '"' : '\'';
    std::string out = "b";
    out += quote;
    for (unsigned char c : s) {
        if (c == quote || c == '\\') {
            out += '\\';
            out += static_cast<char>(c);
        } else if (c == '\t') {
            out += "\\t";
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\r') {
            out += "\\r";
        } else if (c < 0x20 || c >= 0x7f) {
            out += fmt::format("\\x{:02x}", static_cast<unsigned>(c));
        } else {
            out += static_cast<char>(c);
        }
    }
    out += quote;
    return out;
}

// float.__repr__: shortest round-trip digits, exponent form when the decimal
// point falls outside (-4, 16].
std::string repr_float(double x, bool add_dot_0) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
    std::string_view sci(buf, static_cast<std::size_t>(res.ptr - buf));
    std::string sign;
    if (!sci.empty() && sci.front() == '-') {
        sign = "-";
        sci.remove_prefix(1);
    }
    std::size_t e = sci.find('e');
    std::string digits;
    for (char c : sci.substr(0, e)) {
        if (c != '.') digits += c;
    }
    int exponent = std::stoi(std::string(sci.substr(e + 1)));
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    int decpt = exponent + 1;
    std::string out = sign;
    if (decpt <= -4 || decpt > 16) {
        out += digits[0];
        if (digits.size() > 1) {
            out += '.';
            out += digits.substr(1);
        }
        out += fmt::format("e{}{:02d}", exponent < 0 ? '-' : '+', std::abs(exponent));
        return out;
    }
    if (digits == "0") decpt = 1;
    if (decpt <= 0) {
        out += "0.";
        out += std::string(static_cast<std::size_t>(-decpt), '0');
        out += digits;
    } else if (static_cast<std::size_t>(decpt) >= digits.size()) {
        out += digits;
        out += std::string(static_cast<std::size_t>(decpt) - digits.size(), '0');
        if (add_dot_0) out += ".0";
    } else {
        out += digits.substr(0, static_cast<std::size_t>(decpt));
        out += '.';
        out += digits.substr(static_cast<std::size_t>(decpt));
    }
    return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

bool contains(std::string_view hay, std::string_view needle) { return hay.find(needle) != std::string_view::npos; }

struct Literal {
    std::string text;
    Quotes quotes;
};

// Writes a string literal body minimizing escapes; returns the body and the
// quote styles still usable.
Literal str_literal_helper(std::string_view value, const Quotes& quote_types, bool escape_special_whitespace) {
    std::u32string chars = unicode::to_utf32(value);
    std::string escaped;
    for (char32_t c : chars) {
        if (!escape_special_whitespace && (c == U'\n' || c == U'\t')) {
            escaped += static_cast<char>(c);
        } else if (c == U'\\' || !unicode::is_printable(c)) {
            append_unicode_escape(escaped, c);
        } else {
            unicode::append_utf8(escaped, c);
        }
    }
    Quotes possible = quote_types;
    if (contains(escaped, "\n")) {
        std::erase_if(possible, [](std::string_view q) { return q.size() != 3; });
    }
    std::erase_if(possible, [&](std::string_view q) { return contains(escaped, q); });
    if (possible.empty()) {
        std::string r = repr_str(chars);
        std::string_view quote = r[0] == '"' ? std::string_view("\"") : std::string_view("'");
        for (auto q : quote_types) {
            if (contains(q, r.substr(0, 1))) {
                quote = q;
                break;
            }
        }
        return {r.substr(1, r.size() - 2), {quote}};
    }
    if (!escaped.empty()) {
        char last = escaped.back();
        std::stable_sort(possible.begin(), possible.end(),
                         [&](std::string_view a, std::string_view b) { return (a[0] == last) < (b[0] == last); });
        if (possible.front()[0] == last) {
            escaped.insert(escaped.size() - 1, "\\");
        }
    }
    return {std::move(escaped), std::move(possible)};
}

class Unparser {
public:
    explicit Unparser(bool avoid_backslashes = false) : avoid_backslashes_(avoid_backslashes) {}

    std::string visit(const SyntaxNode& n, int prec = TEST) {
        out_.clear();
        written_ = false;
        traverse(n, prec);
        return std::move(out_);
    }

private:
    void write(std::string_view s) {
        out_ += s;
        written_ = true;
    }
    void maybe_newline() {
        if (written_) write("\n");
    }
    void fill(std::string_view text = {}) {
        maybe_newline();
        write(std::string(static_cast<std::size_t>(indent_) * 4, ' '));
        write(text);
    }
    void open_block() {
        write(":");
        ++indent_;
    }
    void close_block() { --indent_; }

    void traverse_body(const std::vector<SyntaxNode>& body, std::size_t from = 0) {
        for (std::size_t i = from; i < body.size(); ++i) traverse(body[i]);
    }

    template <typename F>
    void interleave(const std::vector<SyntaxNode>& items, F&& f, std::string_view sep = ", ") {
        bool first = true;
        for (const auto& item : items) {
            if (!first) write(sep);
            first = false;
            f(item);
        }
    }

    void traverse_list(const std::vector<SyntaxNode>& items, int prec = TEST) {
        interleave(items, [&](const SyntaxNode& n) { traverse(n, prec); });
    }

    static const SyntaxNode* docstring(const SyntaxNode& n) {
        if (n.kind != NodeKind::Module && n.kind != NodeKind::FunctionDef && n.kind != NodeKind::AsyncFunctionDef &&
            n.kind != NodeKind::ClassDef) {
            return nullptr;
        }
        const auto& body = n.field(n.kind == NodeKind::Module ? fld::body
                                   : n.kind == NodeKind::ClassDef ? fld::cls_body
                                                                  : fld::fn_body);
        if (body.empty() || body.front().kind != NodeKind::Expr) return nullptr;
        const SyntaxNode& v = body.front().field(fld::value).front();
        if (v.kind == NodeKind::Constant && v.value.type == ConstantValue::Type::Str) return &v;
        return nullptr;
    }

    void write_docstring_and_body(const SyntaxNode& n, const std::vector<SyntaxNode>& body) {
        if (const SyntaxNode* doc = docstring(n)) {
            fill();
            if (doc->value.u_prefix) write("u");
            write_str_avoiding_backslashes(doc->value.text, kMultiQuotes);
            traverse_body(body, 1);
        } else {
            traverse_body(body);
        }
    }

    void write_str_avoiding_backslashes(std::string_view s, const Quotes& quotes = kAllQuotes) {
        Literal lit = str_literal_helper(s, quotes, false);
        write(lit.quotes.front());
        write(lit.text);
        write(lit.quotes.front());
    }

    void write_constant(const ConstantValue& v) {
        using T = ConstantValue::Type;
        if (v.type == T::Float || v.type == T::Complex) {
            std::string r = constant_repr(v);
            r = replace_all(std::move(r), "inf", kInf);
            r = replace_all(std::move(r), "nan", "(" + std::string(kInf) + "-" + std::string(kInf) + ")");
            write(r);
        } else if (avoid_backslashes_ && v.type == T::Str) {
            write_str_avoiding_backslashes(v.text);
        } else {
            write(constant_repr(v));
        }
    }

    // ----------------------------------------------------------- f-strings

    std::string fstring_part(const SyntaxNode& n) {
        if (n.kind == NodeKind::Constant) {
            if (n.value.type != ConstantValue::Type::Str) {
                throw std::runtime_error("Constants inside JoinedStr should be a string.");
            }
            return replace_all(replace_all(n.value.text, "{", "{{"), "}", "}}");
        }
        if (n.kind == NodeKind::FormattedValue) return fstring_formatted_value(n);
        if (n.kind == NodeKind::JoinedStr) return fstring_joined(n);
        throw std::runtime_error("unexpected node inside an f-string");
    }

    std::string fstring_joined(const SyntaxNode& n) {
        std::string out;
        for (const auto& v : n.field(fld::js_values)) out += fstring_part(v);
        return out;
    }

    std::string fstring_formatted_value(const SyntaxNode& n) {
        std::string out = "{";
        Unparser inner(true);
        std::string expr = inner.visit(n.field(fld::fv_value).front(), next(TEST));
        if (!expr.empty() && expr.front() == '{') out += ' ';
        if (contains(expr, "\\")) throw std::runtime_error("Unable to avoid backslash in f-string expression part");
        out += expr;
        if (n.conversion != -1) {
            out += '!';
            out += static_cast<char>(n.conversion);
        }
        if (const SyntaxNode* spec = n.optional(fld::fv_format_spec)) {
            out += ':';
            out += fstring_part(*spec);
        }
        out += '}';
        return out;
    }

    void visit_joined_str(const SyntaxNode& n) {
        write("f");
        if (avoid_backslashes_) {
            write_str_avoiding_backslashes(fstring_joined(n));
            return;
        }
        std::vector<std::pair<std::string, bool>> parts;
        for (const auto& v : n.field(fld::js_values)) parts.emplace_back(fstring_part(v), v.kind == NodeKind::Constant);
        Quotes quotes = kAllQuotes;
        std::string body;
        for (const auto& [text, is_constant] : parts) {
            Literal lit = str_literal_helper(text, quotes, is_constant);
            body += lit.text;
            quotes = std::move(lit.quotes);
        }
        write(quotes.front());
        write(body);
        write(quotes.front());
    }

    // ----------------------------------------------------------- arguments

    void visit_arguments(const SyntaxNode& n) {
        bool first = true;
        std::vector<const SyntaxNode*> all;
        for (const auto& a : n.field(fld::posonlyargs)) all.push_back(&a);
        for (const auto& a : n.field(fld::args)) all.push_back(&a);
        const auto& defaults = n.field(fld::defaults);
        std::size_t offset = all.size() - std::min(all.size(), defaults.size());
        std::size_t posonly = n.field(fld::posonlyargs).size();
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (!first) write(", ");
            first = false;
            traverse(*all[i]);
            if (i >= offset) {
                write("=");
                traverse(defaults[i - offset]);
            }
            if (i + 1 == posonly) write(", /");
        }
        const SyntaxNode* vararg = n.optional(fld::vararg);
        const auto& kwonly = n.field(fld::kwonlyargs);
        if (vararg || !kwonly.empty()) {
            if (!first) write(", ");
            first = false;
            write("*");
            if (vararg) {
                write(vararg->name);
                if (const SyntaxNode* ann = vararg->optional(fld::annotation)) {
                    write(": ");
                    traverse(*ann);
                }
            }
        }
        const auto& kw_defaults = n.field(fld::kw_defaults);
        for (std::size_t i = 0; i < kwonly.size(); ++i) {
            write(", ");
            traverse(kwonly[i]);
            if (i < kw_defaults.size() && kw_defaults[i].kind != NodeKind::Absent) {
                write("=");
                traverse(kw_defaults[i]);
            }
        }
        if (const SyntaxNode* kwarg = n.optional(fld::kwarg)) {
            if (!first) write(", ");
            write("**" + kwarg->name);
            if (const SyntaxNode* ann = kwarg->optional(fld::annotation)) {
                write(": ");
                traverse(*ann);
            }
        }
    }

    // ------------------------------------------------------------ dispatch

    struct Parens {
        Parens(Unparser& u, bool on, std::string_view open = "(", std::string_view close = ")")
            : u(u), on(on), close(close) {
            if (on) u.write(open);
        }
        ~Parens() {
            if (on) u.write(close);
        }
        Unparser& u;
        bool on;
        std::string_view close;
    };

    void simple_block(const std::vector<SyntaxNode>& body) {
        open_block();
        traverse_body(body);
        close_block();
    }

    void else_block(const std::vector<SyntaxNode>& orelse) {
        if (orelse.empty()) return;
        fill("else");
        simple_block(orelse);
    }

    static std::string_view binop_text(Operator op) {
        switch (op) {
            case Operator::Add: return "+";
            case Operator::Sub: return "-";
            case Operator::Mult: return "*";
            case Operator::MatMult: return "@";
            case Operator::Div: return "/";
            case Operator::Mod: return "%";
            case Operator::LShift: return "<<";
            case Operator::RShift: return ">>";
            case Operator::BitOr: return "|";
            case Operator::BitXor: return "^";
            case Operator::BitAnd: return "&";
            case Operator::FloorDiv: return "//";
            case Operator::Pow: return "**";
            default: throw std::runtime_error("not a binary operator");
        }
    }

    static int binop_prec(Operator op) {
        switch (op) {
            case Operator::Add:
            case Operator::Sub: return ARITH;
            case Operator::Mult:
            case Operator::MatMult:
            case Operator::Div:
            case Operator::Mod:
            case Operator::FloorDiv: return TERM;
            case Operator::LShift:
            case Operator::RShift: return SHIFT;
            case Operator::BitOr: return BOR;
            case Operator::BitXor: return BXOR;
            case Operator::BitAnd: return BAND;
            case Operator::Pow: return POWER;
            default: throw std::runtime_error("not a binary operator");
        }
    }

    static std::string_view cmpop_text(Operator op) {
        switch (op) {
            case Operator::Eq: return "==";
            case Operator::NotEq: return "!=";
            case Operator::Lt: return "<";
            case Operator::LtE: return "<=";
            case Operator::Gt: return ">";
            case Operator::GtE: return ">=";
            case Operator::Is: return "is";
            case Operator::IsNot: return "is not";
            case Operator::In: return "in";
            case Operator::NotIn: return "not in";
            default: throw std::runtime_error("not a comparison operator");
        }
    }

    void function_def(const SyntaxNode& n, std::string_view keyword) {
        maybe_newline();
        for (const auto& d : n.field(fld::fn_decorators)) {
            fill("@");
            traverse(d);
        }
        fill(std::string(keyword) + " " + n.name);
        write("(");
        traverse(n.field(fld::fn_args).front());
        write(")");
        if (const SyntaxNode* r = n.optional(fld::fn_returns)) {
            write(" -> ");
            traverse(*r);
        }
        open_block();
        write_docstring_and_body(n, n.field(fld::fn_body));
        close_block();
    }

    void traverse(const SyntaxNode& n, int prec = TEST) {
        using K = NodeKind;
        switch (n.kind) {
            case K::Module:
                write_docstring_and_body(n, n.field(fld::body));
                return;
            case K::Expr:
                fill();
                traverse(n.field(fld::value).front(), YIELD);
                return;
            case K::NamedExpr: {
                Parens p(*this, prec > TUPLE);
                traverse(n.field(fld::named_target).front(), ATOM);
                write(" := ");
                traverse(n.field(fld::named_value).front(), ATOM);
                return;
            }
            case K::Import:
                fill("import ");
                traverse_list(n.field(fld::import_names));
                return;
            case K::ImportFrom:
                fill("from ");
                write(std::string(static_cast<std::size_t>(n.level), '.'));
                if (!n.name.empty()) write(n.name);
                write(" import ");
                traverse_list(n.field(fld::import_names));
                return;
            case K::Assign:
                fill();
                for (const auto& t : n.field(fld::assign_targets)) {
                    traverse(t);
                    write(" = ");
                }
                traverse(n.field(fld::assign_value).front());
                return;
            case K::AugAssign:
                fill();
                traverse(n.field(fld::aug_target).front());
                write(" " + std::string(binop_text(n.op)) + "= ");
                traverse(n.field(fld::aug_value).front());
                return;
            case K::AnnAssign: {
                fill();
                const SyntaxNode& target = n.field(fld::ann_target).front();
                {
                    Parens p(*this, !n.simple && target.kind == K::Name);
                    traverse(target);
                }
                write(": ");
                traverse(n.field(fld::ann_annotation).front());
                if (const SyntaxNode* v = n.optional(fld::ann_value)) {
                    write(" = ");
                    traverse(*v);
                }
                return;
            }
            case K::Return:
                fill("return");
                if (const SyntaxNode* v = n.optional(fld::value)) {
                    write(" ");
                    traverse(*v);
                }
                return;
            case K::Pass: fill("pass"); return;
            case K::Break: fill("break"); return;
            case K::Continue: fill("continue"); return;
            case K::Delete:
                fill("del ");
                traverse_list(n.field(fld::targets));
                return;
            case K::Assert:
                fill("assert ");
                traverse(n.field(fld::assert_test).front());
                if (const SyntaxNode* m = n.optional(fld::assert_msg)) {
                    write(", ");
                    traverse(*m);
                }
                return;
            case K::Global:
            case K::Nonlocal: {
                fill(n.kind == K::Global ? "global " : "nonlocal ");
                bool first = true;
                for (const auto& name : n.names) {
                    if (!first) write(", ");
                    first = false;
                    write(name);
                }
                return;
            }
            case K::Await: {
                Parens p(*this, prec > AWAIT);
                write("await");
                if (const SyntaxNode* v = n.optional(fld::value)) {
                    write(" ");
                    traverse(*v, ATOM);
                }
                return;
            }
            case K::Yield: {
                Parens p(*this, prec > YIELD);
                write("yield");
                if (const SyntaxNode* v = n.optional(fld::value)) {
                    write(" ");
                    traverse(*v, ATOM);
                }
                return;
            }
            case K::YieldFrom: {
                Parens p(*this, prec > YIELD);
                write("yield from ");
                traverse(n.field(fld::value).front(), ATOM);
                return;
            }
            case K::Raise:
                fill("raise");
                if (const SyntaxNode* e = n.optional(fld::raise_exc)) {
                    write(" ");
                    traverse(*e);
                    if (const SyntaxNode* c = n.optional(fld::raise_cause)) {
                        write(" from ");
                        traverse(*c);
                    }
                }
                return;
            case K::Try:
                fill("try");
                simple_block(n.field(fld::try_body));
                for (const auto& h : n.field(fld::try_handlers)) traverse(h);
                else_block(n.field(fld::try_orelse));
                if (!n.field(fld::try_finalbody).empty()) {
                    fill("finally");
                    simple_block(n.field(fld::try_finalbody));
                }
                return;
            case K::ExceptHandler:
                fill("except");
                if (const SyntaxNode* t = n.optional(fld::handler_type)) {
                    write(" ");
                    traverse(*t);
                }
                if (!n.name.empty()) write(" as " + n.name);
                simple_block(n.field(fld::handler_body));
                return;
            case K::ClassDef: {
                maybe_newline();
                for (const auto& d : n.field(fld::cls_decorators)) {
                    fill("@");
                    traverse(d);
                }
                fill("class " + n.name);
                bool has_args = !n.field(fld::cls_bases).empty() || !n.field(fld::cls_keywords).empty();
                {
                    Parens p(*this, has_args);
                    bool comma = false;
                    for (std::size_t f : {fld::cls_bases, fld::cls_keywords}) {
                        for (const auto& e : n.field(f)) {
                            if (comma) write(", ");
                            comma = true;
                            traverse(e);
                        }
                    }
                }
                open_block();
                write_docstring_and_body(n, n.field(fld::cls_body));
                close_block();
                return;
            }
            case K::FunctionDef: function_def(n, "def"); return;
            case K::AsyncFunctionDef: function_def(n, "async def"); return;
            case K::For:
            case K::AsyncFor:
                fill(n.kind == K::For ? "for " : "async for ");
                traverse(n.field(fld::for_target).front());
                write(" in ");
                traverse(n.field(fld::for_iter).front());
                simple_block(n.field(fld::for_body));
                else_block(n.field(fld::for_orelse));
                return;
            case K::If: {
                fill("if ");
                traverse(n.field(fld::test).front());
                simple_block(n.field(fld::cond_body));
                const SyntaxNode* cur = &n;
                while (cur->field(fld::cond_orelse).size() == 1 && cur->field(fld::cond_orelse).front().kind == K::If) {
                    cur = &cur->field(fld::cond_orelse).front();
                    fill("elif ");
                    traverse(cur->field(fld::test).front());
                    simple_block(cur->field(fld::cond_body));
                }
                else_block(cur->field(fld::cond_orelse));
                return;
            }
            case K::While:
                fill("while ");
                traverse(n.field(fld::test).front());
                simple_block(n.field(fld::cond_body));
                else_block(n.field(fld::cond_orelse));
                return;
            case K::With:
            case K::AsyncWith:
                fill(n.kind == K::With ? "with " : "async with ");
                traverse_list(n.field(fld::with_items));
                simple_block(n.field(fld::with_body));
                return;
            case K::JoinedStr: visit_joined_str(n); return;
            case K::FormattedValue:
                write("f");
                write_str_avoiding_backslashes(fstring_formatted_value(n));
                return;
            case K::Name: write(n.name); return;
            case K::Constant:
                if (n.value.type == ConstantValue::Type::Ellipsis) {
                    write("...");
                    return;
                }
                if (n.value.u_prefix) write("u");
                write_constant(n.value);
                return;
            case K::List: {
                Parens p(*this, true, "[", "]");
                traverse_list(n.field(fld::elts));
                return;
            }
            case K::ListComp:
            case K::GeneratorExp:
            case K::SetComp: {
                bool gen = n.kind == K::GeneratorExp;
                bool list = n.kind == K::ListComp;
                Parens p(*this, true, gen ? "(" : list ? "[" : "{", gen ? ")" : list ? "]" : "}");
                traverse(n.field(fld::comp_elt).front());
                for (const auto& g : n.field(fld::comp_generators)) traverse(g);
                return;
            }
            case K::DictComp: {
                Parens p(*this, true, "{", "}");
                traverse(n.field(fld::dictcomp_key).front());
                write(": ");
                traverse(n.field(fld::dictcomp_value).front());
                for (const auto& g : n.field(fld::dictcomp_generators)) traverse(g);
                return;
            }
            case K::comprehension:
                write(n.is_async ? " async for " : " for ");
                traverse(n.field(fld::gen_target).front(), TUPLE);
                write(" in ");
                traverse(n.field(fld::gen_iter).front(), next(TEST));
                for (const auto& c : n.field(fld::gen_ifs)) {
                    write(" if ");
                    traverse(c, next(TEST));
                }
                return;
            case K::IfExp: {
                Parens p(*this, prec > TEST);
                traverse(n.field(fld::cond_body).front(), next(TEST));
                write(" if ");
                traverse(n.field(fld::test).front(), next(TEST));
                write(" else ");
                traverse(n.field(fld::cond_orelse).front(), TEST);
                return;
            }
            case K::Set:
                if (n.field(fld::elts).empty()) {
                    write("{*()}");
                } else {
                    Parens p(*this, true, "{", "}");
                    traverse_list(n.field(fld::elts));
                }
                return;
            case K::Dict: {
                Parens p(*this, true, "{", "}");
                const auto& keys = n.field(fld::dict_keys);
                const auto& values = n.field(fld::dict_values);
                for (std::size_t i = 0; i < keys.size(); ++i) {
                    if (i) write(", ");
                    if (keys[i].kind == K::Absent) {
                        write("**");
                        traverse(values[i], EXPR);
                    } else {
                        traverse(keys[i]);
                        write(": ");
                        traverse(values[i]);
                    }
                }
                return;
            }
            case K::Tuple: {
                Parens p(*this, true);
                items_view(n.field(fld::elts));
                return;
            }
            case K::UnaryOp: {
                int op_prec = n.op == Operator::Not ? NOT : FACTOR;
                Parens p(*this, prec > op_prec);
                switch (n.op) {
                    case Operator::Not: write("not "); break;
                    case Operator::Invert: write("~"); break;
                    case Operator::UAdd: write("+"); break;
                    default: write("-"); break;
                }
                traverse(n.field(fld::operand).front(), op_prec);
                return;
            }
            case K::BinOp: {
                int op_prec = binop_prec(n.op);
                Parens p(*this, prec > op_prec);
                bool right_assoc = n.op == Operator::Pow;
                traverse(n.field(fld::left).front(), right_assoc ? next(op_prec) : op_prec);
                write(" " + std::string(binop_text(n.op)) + " ");
                traverse(n.field(fld::right).front(), right_assoc ? op_prec : next(op_prec));
                return;
            }
            case K::Compare: {
                Parens p(*this, prec > CMP);
                traverse(n.field(fld::cmp_left).front(), next(CMP));
                const auto& comparators = n.field(fld::cmp_comparators);
                for (std::size_t i = 0; i < comparators.size(); ++i) {
                    write(" " + std::string(cmpop_text(n.ops[i])) + " ");
                    traverse(comparators[i], next(CMP));
                }
                return;
            }
            case K::BoolOp: {
                int op_prec = n.op == Operator::And ? AND : OR;
                Parens p(*this, prec > op_prec);
                int level = op_prec;
                interleave(
                    n.field(fld::bool_values),
                    [&](const SyntaxNode& v) {
                        level = next(level);
                        traverse(v, level);
                    },
                    n.op == Operator::And ? " and " : " or ");
                return;
            }
            case K::Attribute: {
                const SyntaxNode& v = n.field(fld::value).front();
                traverse(v, ATOM);
                if (v.kind == K::Constant && (v.value.type == ConstantValue::Type::Int ||
                                              v.value.type == ConstantValue::Type::True ||
                                              v.value.type == ConstantValue::Type::False)) {
                    write(" ");
                }
                write(".");
                write(n.name);
                return;
            }
            case K::Call: {
                traverse(n.field(fld::call_func).front(), ATOM);
                Parens p(*this, true);
                bool comma = false;
                for (std::size_t f : {fld::call_args, fld::call_keywords}) {
                    for (const auto& e : n.field(f)) {
                        if (comma) write(", ");
                        comma = true;
                        traverse(e);
                    }
                }
                return;
            }
            case K::Subscript: {
                traverse(n.field(fld::sub_value).front(), ATOM);
                Parens p(*this, true, "[", "]");
                const SyntaxNode& s = n.field(fld::sub_slice).front();
                bool simple_tuple = s.kind == K::Tuple && !s.field(fld::elts).empty() &&
                                    std::none_of(s.field(fld::elts).begin(), s.field(fld::elts).end(),
                                                 [](const SyntaxNode& e) { return e.kind == K::Starred; });
                if (simple_tuple) items_view(s.field(fld::elts));
                else traverse(s);
                return;
            }
            case K::Starred:
                write("*");
                traverse(n.field(fld::value).front(), EXPR);
                return;
            case K::Slice:
                if (const SyntaxNode* l = n.optional(fld::slice_lower)) traverse(*l);
                write(":");
                if (const SyntaxNode* u = n.optional(fld::slice_upper)) traverse(*u);
                if (const SyntaxNode* s = n.optional(fld::slice_step)) {
                    write(":");
                    traverse(*s);
                }
                return;
            case K::Match:
                fill("match ");
                traverse(n.field(fld::match_subject).front());
                open_block();
                for (const auto& c : n.field(fld::match_cases)) traverse(c);
                close_block();
                return;
            case K::arg:
                write(n.name);
                if (const SyntaxNode* a = n.optional(fld::annotation)) {
                    write(": ");
                    traverse(*a);
                }
                return;
            case K::arguments: visit_arguments(n); return;
            case K::keyword:
                if (n.name.empty()) {
                    write("**");
                } else {
                    write(n.name);
                    write("=");
                }
                traverse(n.field(fld::value).front());
                return;
            case K::Lambda: {
                Parens p(*this, prec > TEST);
                write("lambda ");
                traverse(n.field(fld::lambda_args).front());
                write(": ");
                traverse(n.field(fld::lambda_body).front(), TEST);
                return;
            }
            case K::alias:
                write(n.name);
                if (!n.asname.empty()) write(" as " + n.asname);
                return;
            case K::withitem:
                traverse(n.field(fld::context_expr).front());
                if (const SyntaxNode* v = n.optional(fld::optional_vars)) {
                    write(" as ");
                    traverse(*v);
                }
                return;
            case K::match_case:
                fill("case ");
                traverse(n.field(fld::case_pattern).front());
                if (const SyntaxNode* g = n.optional(fld::case_guard)) {
                    write(" if ");
                    traverse(*g);
                }
                simple_block(n.field(fld::case_body));
                return;
            case K::MatchValue: traverse(n.field(fld::value).front()); return;
            case K::MatchSingleton: write_constant(n.value); return;
            case K::MatchSequence: {
                Parens p(*this, true, "[", "]");
                traverse_list(n.field(fld::patterns));
                return;
            }
            case K::MatchStar: write("*" + (n.name.empty() ? std::string("_") : n.name)); return;
            case K::MatchMapping: {
                Parens p(*this, true, "{", "}");
                const auto& keys = n.field(fld::map_keys);
                const auto& pats = n.field(fld::map_patterns);
                for (std::size_t i = 0; i < keys.size(); ++i) {
                    if (i) write(", ");
                    traverse(keys[i]);
                    write(": ");
                    traverse(pats[i]);
                }
                if (!n.name.empty()) {
                    if (!keys.empty()) write(", ");
                    write("**" + n.name);
                }
                return;
            }
            case K::MatchClass: {
                traverse(n.field(fld::class_cls).front(), ATOM);
                Parens p(*this, true);
                const auto& pats = n.field(fld::class_patterns);
                traverse_list(pats);
                const auto& kwd = n.field(fld::class_kwd_patterns);
                if (!n.names.empty()) {
                    if (!pats.empty()) write(", ");
                    for (std::size_t i = 0; i < n.names.size(); ++i) {
                        if (i) write(", ");
                        write(n.names[i] + "=");
                        traverse(kwd[i]);
                    }
                }
                return;
            }
            case K::MatchAs: {
                const SyntaxNode* pat = n.optional(fld::as_pattern);
                if (n.name.empty()) {
                    write("_");
                } else if (!pat) {
                    write(n.name);
                } else {
                    Parens p(*this, prec > TEST);
                    traverse(*pat, BOR);
                    write(" as " + n.name);
                }
                return;
            }
            case K::MatchOr: {
                Parens p(*this, prec > BOR);
                interleave(n.field(fld::patterns), [&](const SyntaxNode& v) { traverse(v, next(BOR)); }, " | ");
                return;
            }
            case K::Absent: return;
        }
    }

    void items_view(const std::vector<SyntaxNode>& items) {
        if (items.size() == 1) {
            traverse(items.front());
            write(",");
        } else {
            traverse_list(items);
        }
    }

    std::string out_;
    bool written_ = false;
    int indent_ = 0;
    bool avoid_backslashes_ = false;
};

}  // namespace

std::string constant_repr(const ConstantValue& v) {
    using T = ConstantValue::Type;
    switch (v.type) {
        case T::None: return "None";
        case T::True: return "True";
        case T::False: return "False";
        case T::Ellipsis: return "Ellipsis";
        case T::Int: return v.text;
        case T::Float: return repr_float(v.number, true);
        case T::Complex: return repr_float(v.number, false) + "j";
        case T::Str: return repr_str(unicode::to_utf32(v.text));
        case T::Bytes: return repr_bytes(v.text);
    }
    return {};
}

std::string unparse(const SyntaxNode& node) { return Unparser().visit(node); }

std::string unparse(const SyntaxTree& tree) { return unparse(tree.root); }

}  // namespace codecorpus::syntax
