// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace codecorpus::syntax::detail {

// Raised anywhere inside the lexer or parser; converted to ParseFailure at the
// public boundary.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::size_t offset, const std::string& message)
        : std::runtime_error(message), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

enum class TokenType { Name, Number, String, Op, Newline, Indent, Dedent, EndMarker };

struct Token {
    TokenType type;
    std::string_view text;  // exact source bytes (empty for synthetic tokens)
    std::size_t begin = 0;
    std::size_t end = 0;

    bool is_op(std::string_view op) const { return type == TokenType::Op && text == op; }
    bool is_name(std::string_view n) const { return type == TokenType::Name && text == n; }
};

// Tokenizes a complete Python 3.10 source file. `source` must be valid UTF-8;
// a leading byte-order mark is skipped.
std::vector<Token> tokenize(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace codecorpus::syntax::detail
