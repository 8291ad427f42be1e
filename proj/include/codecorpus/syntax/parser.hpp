// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

#include "codecorpus/syntax/node.hpp"

namespace codecorpus::syntax {

/// Why a document could not be parsed. Line and column are 1-based; the
/// column counts bytes.
struct ParseFailure {
    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;
    std::string message;
};

class ParseResult {
public:
    ParseResult(SyntaxTree tree) : state_(std::move(tree)) {}
    ParseResult(ParseFailure failure) : state_(std::move(failure)) {}

    bool ok() const { return std::holds_alternative<SyntaxTree>(state_); }
    explicit operator bool() const { return ok(); }

    const SyntaxTree& tree() const& { return std::get<SyntaxTree>(state_); }
    SyntaxTree&& tree() && { return std::get<SyntaxTree>(std::move(state_)); }
    const ParseFailure& failure() const { return std::get<ParseFailure>(state_); }

private:
    std::variant<SyntaxTree, ParseFailure> state_;
};

/// Parses a module written against the Python 3.10 grammar.
///
/// The input must be UTF-8; a leading byte-order mark is skipped and encoding
/// declarations are ignored. The result mirrors what CPython 3.10's
/// `ast.parse` produces for the same text: same node kinds, same field
/// layout, same literal values. Checks that CPython performs later, at
/// compile time (misplaced `return`, duplicate parameters, and so on), are
/// not performed here either.
ParseResult parse(std::string_view source, std::string source_id = {});

}  // namespace codecorpus::syntax
