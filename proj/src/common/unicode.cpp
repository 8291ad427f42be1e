// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/common/unicode.hpp"

#include <algorithm>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <vector>

namespace codecorpus::unicode {
namespace {

#include "unicode_data.inc"

bool in_ranges(std::span<const CodepointRange> ranges, char32_t cp) {
    auto it = std::upper_bound(ranges.begin(), ranges.end(), cp,
                               [](char32_t value, const CodepointRange& r) { return value < r.lo; });
    if (it == ranges.begin()) return false;
    --it;
    return cp >= it->lo && cp <= it->hi;
}

struct NameIndex {
    std::vector<std::string_view> records;

    NameIndex() {
        std::string_view all(kCharacterNames, sizeof(kCharacterNames) - 1);
        std::size_t pos = 0;
        while (pos < all.size()) {
            std::size_t nl = all.find('\n', pos);
            records.push_back(all.substr(pos, nl - pos));
            pos = nl + 1;
        }
    }
};

std::optional<char32_t> algorithmic_name(std::string_view name) {
    static constexpr std::string_view kPrefixes[] = {
        "CJK UNIFIED IDEOGRAPH-", "CJK COMPATIBILITY IDEOGRAPH-", "TANGUT IDEOGRAPH-",
        "KHITAN SMALL SCRIPT CHARACTER-", "NUSHU CHARACTER-"};
    for (auto prefix : kPrefixes) {
        if (name.substr(0, prefix.size()) != prefix) continue;
        auto hex = name.substr(prefix.size());
        if (hex.size() < 4 || hex.size() > 5) return std::nullopt;
        char32_t cp = 0;
        for (char c : hex) {
            int d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
            else return std::nullopt;
            cp = cp * 16 + static_cast<char32_t>(d);
        }
        // Only accept values whose canonical name round-trips.
        std::string canonical(prefix);
        char buf[8];
        std::snprintf(buf, sizeof buf, "%X", static_cast<unsigned>(cp));
        canonical += buf;
        if (canonical != name) return std::nullopt;
        return cp;
    }
    return std::nullopt;
}

std::optional<char32_t> hangul_name(std::string_view name) {
    static constexpr std::string_view kPrefix = "HANGUL SYLLABLE ";
    if (name.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
    static constexpr std::string_view kLead[] = {"G", "GG", "N", "D", "DD", "R", "M", "B", "BB", "S",
                                                 "SS", "", "J", "JJ", "C", "K", "T", "P", "H"};
    static constexpr std::string_view kVowel[] = {"A", "AE", "YA", "YAE", "EO", "E", "YEO",
                                                  "YE", "O", "WA", "WAE", "OE", "YO", "U",
                                                  "WEO", "WE", "WI", "YU", "EU", "YI", "I"};
    static constexpr std::string_view kTail[] = {"", "G", "GG", "GS", "N", "NJ", "NH", "D", "L", "LG",
                                                 "LM", "LB", "LS", "LT", "LP", "LH", "M", "B", "BS",
                                                 "S", "SS", "NG", "J", "C", "K", "T", "P", "H"};
    auto rest = name.substr(kPrefix.size());
    for (std::size_t l = 0; l < std::size(kLead); ++l) {
        for (std::size_t v = 0; v < std::size(kVowel); ++v) {
            for (std::size_t t = 0; t < std::size(kTail); ++t) {
                if (rest.size() != kLead[l].size() + kVowel[v].size() + kTail[t].size()) continue;
                std::string candidate = std::string(kLead[l]) + std::string(kVowel[v]) + std::string(kTail[t]);
                if (candidate == rest) return static_cast<char32_t>(0xAC00 + (l * 21 + v) * 28 + t);
            }
        }
    }
    return std::nullopt;
}

}  // namespace

bool is_id_start(char32_t cp) {
    if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || cp == '_';
    return in_ranges(kIdStart, cp);
}

bool is_id_continue(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9') || cp == '_';
    }
    return in_ranges(kIdContinue, cp);
}

bool is_printable(char32_t cp) {
    if (cp < 0x80) return cp >= 0x20 && cp < 0x7f;
    return in_ranges(kPrintable, cp);
}

bool is_letter(char32_t cp) { return in_ranges(kLetter, cp); }
bool is_number(char32_t cp) { return in_ranges(kNumber, cp); }

bool is_white_space(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20: case 0x85: case 0xA0:
        case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

std::optional<char32_t> lookup_name(std::string_view name) {
    if (auto cp = algorithmic_name(name)) return cp;
    if (auto cp = hangul_name(name)) return cp;
    static const NameIndex index;
    auto it = std::lower_bound(index.records.begin(), index.records.end(), name,
                               [](std::string_view rec, std::string_view key) {
                                   return rec.substr(0, rec.find(';')) < key;
                               });
    if (it == index.records.end()) return std::nullopt;
    auto semi = it->find(';');
    if (it->substr(0, semi) != name) return std::nullopt;
    char32_t cp = 0;
    for (char c : it->substr(semi + 1)) {
        cp = cp * 16 + static_cast<char32_t>(c <= '9' ? c - '0' : c - 'A' + 10);
    }
    return cp;
}

Decoded decode(std::string_view text, std::size_t pos, bool allow_surrogates) {
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    if (pos >= text.size()) return {};
    unsigned char b0 = byte(pos);
    if (b0 < 0x80) return {b0, 1};
    std::size_t len;
    char32_t cp;
    if (b0 >= 0xC2 && b0 <= 0xDF) { len = 2; cp = b0 & 0x1F; }
    else if (b0 >= 0xE0 && b0 <= 0xEF) { len = 3; cp = b0 & 0x0F; }
    else if (b0 >= 0xF0 && b0 <= 0xF4) { len = 4; cp = b0 & 0x07; }
    else return {};
    if (pos + len > text.size()) return {};
    for (std::size_t i = 1; i < len; ++i) {
        unsigned char b = byte(pos + i);
        if ((b & 0xC0) != 0x80) return {};
        cp = (cp << 6) | (b & 0x3F);
    }
    if (len == 3 && cp < 0x800) return {};
    if (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) return {};
    if (!allow_surrogates && cp >= 0xD800 && cp <= 0xDFFF) return {};
    return {cp, len};
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::optional<std::size_t> first_invalid_utf8(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto d = decode(text, pos);
        if (d.length == 0) return pos;
        pos += d.length;
    }
    return std::nullopt;
}

bool is_valid_utf8(std::string_view text) { return !first_invalid_utf8(text).has_value(); }

std::u32string to_utf32(std::string_view text, bool allow_surrogates) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto d = decode(text, pos, allow_surrogates);
        if (d.length == 0) throw std::invalid_argument("invalid UTF-8 sequence");
        out.push_back(d.cp);
        pos += d.length;
    }
    return out;
}

std::string to_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) append_utf8(out, cp);
    return out;
}

bool is_identifier(std::string_view text) {
    if (text.empty()) return false;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        auto d = decode(text, pos);
        if (d.length == 0) return false;
        if (first ? !is_id_start(d.cp) : !is_id_continue(d.cp)) return false;
        first = false;
        pos += d.length;
    }
    return true;
}

}  // namespace codecorpus::unicode
