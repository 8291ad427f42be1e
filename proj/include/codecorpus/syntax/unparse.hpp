// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "codecorpus/syntax/node.hpp"

namespace codecorpus::syntax {

/// Renders a tree back to Python source.
///
/// The output is byte-identical to CPython 3.10's `ast.unparse` on the
/// equivalent tree: same precedence-driven parenthesization, same string
/// quoting, four-space indentation, a blank line before every function or
/// class definition that does not start the output, and no trailing newline.
/// Throws std::runtime_error when a string inside an f-string replacement
/// field cannot be written without a backslash (CPython raises ValueError).
std::string unparse(const SyntaxNode& node);
std::string unparse(const SyntaxTree& tree);

/// Python's repr() of a constant value (`'abc'`, `b'\x00'`, `1e+16`, `2j`).
std::string constant_repr(const ConstantValue& value);

}  // namespace codecorpus::syntax
