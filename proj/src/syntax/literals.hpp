// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "codecorpus/syntax/node.hpp"

namespace codecorpus::syntax::detail {

// Value of a NUMBER token.
ConstantValue number_value(std::string_view text);

// Decodes backslash escapes of a non-raw str literal body into WTF-8.
// `offset` locates the body in the source for error reporting.
std::string decode_str_escapes(std::string_view body, std::size_t offset);

// Same for bytes literal bodies; the body must be ASCII.
std::string decode_bytes_escapes(std::string_view body, std::size_t offset, bool raw);

}  // namespace codecorpus::syntax::detail
