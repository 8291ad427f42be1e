// SPDX-License-Identifier: Apache-2.0
#include "lexer.hpp"

#include <algorithm>
#include <array>

#include "codecorpus/common/unicode.hpp"

namespace codecorpus::syntax::detail {
namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
};

// Longest operators first so a greedy scan picks the right one.
constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "!=", "%=", "&=", "**", "*=", "+=", "-=", "//",
    "/=", "<<", "<=", "==", ">=", ">>", "@=", "^=", "|=", "(", ")", "[", "]", "{", "}", ":", ",",
    ";", "+", "-", "*", "/", "|", "&", "<", ">", "=", ".", "%", "~", "^", "@",
};

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_hex_digit(char c) { return is_ascii_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }

bool is_string_prefix(std::string_view word) {
    if (word.size() > 2) return false;
    std::string lower;
    for (char c : word) lower.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
    static constexpr std::array<std::string_view, 9> kPrefixes = {"r", "u", "f", "b", "br", "rb", "fr", "rf", ""};
    return std::find(kPrefixes.begin(), kPrefixes.end() - 1, lower) != kPrefixes.end() - 1;
}

class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source) {}

    std::vector<Token> run() {
        if (src_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
        while (true) {
            if (at_line_start_ && brackets_.empty()) {
                if (!handle_indentation()) break;
            }
            skip_inline_space();
            if (pos_ >= src_.size()) break;
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
                continue;
            }
            if (c == '\\') {
                lex_continuation();
                continue;
            }
            if (c == '\n' || c == '\r') {
                std::size_t start = pos_;
                consume_newline();
                if (brackets_.empty()) {
                    if (line_has_tokens_) emit(TokenType::Newline, start, pos_);
                    at_line_start_ = true;
                }
                continue;
            }
            lex_token();
        }
        finish();
        return std::move(tokens_);
    }

private:
    void emit(TokenType type, std::size_t begin, std::size_t end) {
        tokens_.push_back(Token{type, src_.substr(begin, end - begin), begin, end});
        if (type == TokenType::Newline) {
            line_has_tokens_ = false;
        } else if (type != TokenType::Indent && type != TokenType::Dedent) {
            line_has_tokens_ = true;
        }
    }

    [[noreturn]] void fail(std::size_t offset, const std::string& message) const { throw SyntaxError(offset, message); }

    void skip_inline_space() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\f')) ++pos_;
    }

    void consume_newline() {
        if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
    }

    bool is_newline_at(std::size_t p) const { return p < src_.size() && (src_[p] == '\n' || src_[p] == '\r'); }

    void lex_continuation() {
        std::size_t start = pos_;
        ++pos_;
        if (pos_ >= src_.size()) fail(start, "unexpected EOF while parsing");
        if (!is_newline_at(pos_)) fail(start, "unexpected character after line continuation character");
        consume_newline();
        if (pos_ >= src_.size()) fail(start, "unexpected EOF while parsing");
    }

    // Returns false at end of input.
    bool handle_indentation() {
        int col = 0;
        int alt = 0;
        std::size_t p = pos_;
        while (p < src_.size()) {
            char c = src_[p];
            if (c == ' ') {
                ++col;
                ++alt;
            } else if (c == '\t') {
                col = (col / 8 + 1) * 8;
                ++alt;
            } else if (c == '\f') {
                col = alt = 0;
            } else {
                break;
            }
            ++p;
        }
        pos_ = p;
        if (p >= src_.size()) return false;
        char c = src_[p];
        if (c == '#' || c == '\n' || c == '\r') return true;  // blank line; indentation irrelevant
        if (c == '\\' && is_newline_at(p + 1)) return true;
        at_line_start_ = false;
        if (col == indents_.back()) {
            if (alt != alt_indents_.back()) fail(p, "inconsistent use of tabs and spaces in indentation");
        } else if (col > indents_.back()) {
            if (alt <= alt_indents_.back()) fail(p, "inconsistent use of tabs and spaces in indentation");
            indents_.push_back(col);
            alt_indents_.push_back(alt);
            emit(TokenType::Indent, p, p);
        } else {
            while (col < indents_.back()) {
                indents_.pop_back();
                alt_indents_.pop_back();
                emit(TokenType::Dedent, p, p);
            }
            if (col != indents_.back()) fail(p, "unindent does not match any outer indentation level");
            if (alt != alt_indents_.back()) fail(p, "inconsistent use of tabs and spaces in indentation");
        }
        return true;
    }

    void finish() {
        if (!brackets_.empty()) {
            fail(brackets_.back().second, std::string("'") + brackets_.back().first + "' was never closed");
        }
        std::size_t end = src_.size();
        if (line_has_tokens_) emit(TokenType::Newline, end, end);
        while (indents_.size() > 1) {
            indents_.pop_back();
            emit(TokenType::Dedent, end, end);
        }
        emit(TokenType::EndMarker, end, end);
    }

    void lex_token() {
        char c = src_[pos_];
        unsigned char uc = static_cast<unsigned char>(c);
        if (is_ascii_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_ascii_digit(src_[pos_ + 1]))) {
            lex_number();
            return;
        }
        if (c == '\'' || c == '"') {
            lex_string(pos_, pos_);
            return;
        }
        if (uc >= 0x80 || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            lex_name();
            return;
        }
        for (auto op : kOperators) {
            if (src_.compare(pos_, op.size(), op) == 0) {
                track_bracket(op);
                emit(TokenType::Op, pos_, pos_ + op.size());
                pos_ += op.size();
                return;
            }
        }
        if (c == '!') fail(pos_, "invalid syntax");
        fail(pos_, std::string("invalid character '") + c + "'");
    }

    void track_bracket(std::string_view op) {
        char c = op[0];
        if (op.size() != 1) return;
        if (c == '(' || c == '[' || c == '{') {
            brackets_.emplace_back(c, pos_);
        } else if (c == ')' || c == ']' || c == '}') {
            if (brackets_.empty()) fail(pos_, std::string("unmatched '") + c + "'");
            char open = brackets_.back().first;
            bool ok = (open == '(' && c == ')') || (open == '[' && c == ']') || (open == '{' && c == '}');
            if (!ok) {
                fail(pos_, std::string("closing parenthesis '") + c + "' does not match opening parenthesis '" + open + "'");
            }
            brackets_.pop_back();
        }
    }

    void lex_name() {
        std::size_t start = pos_;
        bool first = true;
        while (pos_ < src_.size()) {
            auto d = unicode::decode(src_, pos_);
            if (d.length == 0) fail(pos_, "invalid UTF-8");
            bool ok = first ? unicode::is_id_start(d.cp) : unicode::is_id_continue(d.cp);
            if (!ok) {
                if (first) fail(pos_, "invalid character in identifier");
                break;
            }
            first = false;
            pos_ += d.length;
        }
        std::string_view word = src_.substr(start, pos_ - start);
        if (pos_ < src_.size() && (src_[pos_] == '\'' || src_[pos_] == '"') && is_string_prefix(word)) {
            lex_string(start, pos_);
            return;
        }
        emit(TokenType::Name, start, pos_);
    }

    void lex_string(std::size_t start, std::size_t quote_pos) {
        char quote = src_[quote_pos];
        bool triple = src_.compare(quote_pos, 3, std::string(3, quote)) == 0;
        std::size_t p = quote_pos + (triple ? 3 : 1);
        while (true) {
            if (p >= src_.size()) {
                fail(start, triple ? "unterminated triple-quoted string literal" : "unterminated string literal");
            }
            char c = src_[p];
            if (c == '\\') {
                ++p;
                if (p < src_.size()) {
                    if (src_[p] == '\r' && p + 1 < src_.size() && src_[p + 1] == '\n') ++p;
                    ++p;
                }
                continue;
            }
            if (triple) {
                if (src_.compare(p, 3, std::string(3, quote)) == 0) {
                    p += 3;
                    break;
                }
            } else {
                if (c == quote) {
                    ++p;
                    break;
                }
                if (c == '\n' || c == '\r') fail(start, "unterminated string literal");
            }
            ++p;
        }
        pos_ = p;
        emit(TokenType::String, start, pos_);
    }

    // Consumes digits of one class with single underscores between them.
    // Returns the number of digits consumed.
    template <typename Pred>
    std::size_t digits(Pred pred, bool allow_leading_underscore, const char* what) {
        std::size_t count = 0;
        if (allow_leading_underscore && pos_ < src_.size() && src_[pos_] == '_') {
            ++pos_;
            if (pos_ >= src_.size() || !pred(src_[pos_])) fail(pos_, std::string("invalid ") + what + " literal");
        }
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (pred(c)) {
                ++pos_;
                ++count;
            } else if (c == '_') {
                ++pos_;
                if (pos_ >= src_.size() || !pred(src_[pos_])) fail(pos_ - 1, std::string("invalid ") + what + " literal");
            } else {
                break;
            }
        }
        return count;
    }

    void verify_end_of_number(const char* what) {
        if (pos_ >= src_.size()) return;
        auto d = unicode::decode(src_, pos_);
        if (d.length == 0 || !unicode::is_id_continue(d.cp)) return;
        static constexpr std::array<std::string_view, 8> kAllowed = {"and", "else", "for", "if", "in", "is", "not", "or"};
        for (auto kw : kAllowed) {
            if (src_.compare(pos_, kw.size(), kw) == 0) return;
        }
        fail(pos_, std::string("invalid ") + what + " literal");
    }

    void lex_number() {
        std::size_t start = pos_;
        char c = src_[pos_];
        if (c == '0' && pos_ + 1 < src_.size()) {
            char x = src_[pos_ + 1];
            auto radix = [&](auto pred, const char* what) {
                pos_ += 2;
                if (digits(pred, true, what) == 0) fail(pos_, std::string("invalid ") + what + " literal");
                if (pos_ < src_.size() && is_ascii_digit(src_[pos_])) {
                    fail(pos_, std::string("invalid digit '") + src_[pos_] + "' in " + what + " literal");
                }
                verify_end_of_number(what);
                emit(TokenType::Number, start, pos_);
            };
            if (x == 'x' || x == 'X') return radix(is_hex_digit, "hexadecimal");
            if (x == 'o' || x == 'O') return radix([](char d) { return d >= '0' && d <= '7'; }, "octal");
            if (x == 'b' || x == 'B') return radix([](char d) { return d == '0' || d == '1'; }, "binary");
        }
        bool is_float = false;
        bool nonzero_leading = false;
        if (c != '.') {
            std::size_t int_start = pos_;
            digits(is_ascii_digit, false, "decimal");
            std::string_view int_part = src_.substr(int_start, pos_ - int_start);
            if (int_part.size() > 1 && int_part[0] == '0') {
                nonzero_leading = int_part.find_first_not_of("0_") != std::string_view::npos;
            }
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            is_float = true;
            ++pos_;
            if (pos_ < src_.size() && is_ascii_digit(src_[pos_])) digits(is_ascii_digit, false, "decimal");
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t e = pos_ + 1;
            if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
            if (e < src_.size() && is_ascii_digit(src_[e])) {
                pos_ = e;
                digits(is_ascii_digit, false, "decimal");
                is_float = true;
            } else {
                fail(start, "invalid decimal literal");
            }
        }
        if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) {
            ++pos_;
            verify_end_of_number("imaginary");
            emit(TokenType::Number, start, pos_);
            return;
        }
        if (nonzero_leading && !is_float) {
            fail(start, "leading zeros in decimal integer literals are not permitted; use an 0o prefix for octal integers");
        }
        verify_end_of_number("decimal");
        emit(TokenType::Number, start, pos_);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<Token> tokens_;
    std::vector<int> indents_{0};
    std::vector<int> alt_indents_{0};
    std::vector<std::pair<char, std::size_t>> brackets_;
    bool at_line_start_ = true;
    bool line_has_tokens_ = false;
};

}  // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace codecorpus::syntax::detail
