// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace codecorpus::unicode {

struct CodepointRange {
    char32_t lo;
    char32_t hi;
};

// Character classes pinned to the Unicode version of the supported grammar.
bool is_id_start(char32_t cp);
bool is_id_continue(char32_t cp);
bool is_printable(char32_t cp);
bool is_letter(char32_t cp);
bool is_number(char32_t cp);
// The White_Space property (what `\s` matches in Unicode-aware regex engines).
bool is_white_space(char32_t cp);

// Resolves a character name as accepted by a "\N{...}" escape.
std::optional<char32_t> lookup_name(std::string_view name);

struct Decoded {
    char32_t cp = 0;
    std::size_t length = 0;  // 0 when the bytes at the position are not valid
};

// Decodes one code point at `pos`. Surrogate code points are rejected unless
// `allow_surrogates` is set; internal strings may carry them (WTF-8) because
// escapes such as "\ud800" produce them in literal values.
Decoded decode(std::string_view text, std::size_t pos, bool allow_surrogates = false);

void append_utf8(std::string& out, char32_t cp);

bool is_valid_utf8(std::string_view text);

// Byte offset of the first invalid sequence, if any.
std::optional<std::size_t> first_invalid_utf8(std::string_view text);

std::u32string to_utf32(std::string_view text, bool allow_surrogates = true);
std::string to_utf8(std::u32string_view text);

// True when `text` is a non-empty identifier: start char then continue chars.
bool is_identifier(std::string_view text);

}  // namespace codecorpus::unicode
