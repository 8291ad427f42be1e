// SPDX-License-Identifier: Apache-2.0
#include "literals.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "codecorpus/common/unicode.hpp"
#include "lexer.hpp"

namespace codecorpus::syntax::detail {
namespace {

int digit_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'z') return c - 'a' + 10;
    if (c >= 'A' && c <= 'Z') return c - 'A' + 10;
    return 99;
}

// Converts digits in `base` to a decimal string using base-1e9 limbs.
std::string to_decimal(std::string_view digits, int base) {
    std::vector<std::uint32_t> limbs{0};  // little-endian, base 1e9
    for (char c : digits) {
        std::uint64_t carry = static_cast<std::uint64_t>(digit_value(c));
        for (auto& limb : limbs) {
            std::uint64_t v = static_cast<std::uint64_t>(limb) * static_cast<std::uint64_t>(base) + carry;
            limb = static_cast<std::uint32_t>(v % 1000000000ULL);
            carry = v / 1000000000ULL;
        }
        while (carry) {
            limbs.push_back(static_cast<std::uint32_t>(carry % 1000000000ULL));
            carry /= 1000000000ULL;
        }
    }
    std::string out = std::to_string(limbs.back());
    for (std::size_t i = limbs.size() - 1; i-- > 0;) {
        std::string part = std::to_string(limbs[i]);
        out.append(9 - part.size(), '0');
        out += part;
    }
    return out;
}

int hex_value(char c) {
    int v = digit_value(c);
    return v < 16 ? v : -1;
}

}  // namespace

ConstantValue number_value(std::string_view text) {
    std::string clean;
    clean.reserve(text.size());
    for (char c : text) {
        if (c != '_') clean.push_back(c);
    }
    ConstantValue value;
    char last = clean.back();
    if (last == 'j' || last == 'J') {
        value.type = ConstantValue::Type::Complex;
        clean.pop_back();
        value.number = std::strtod(clean.c_str(), nullptr);
        return value;
    }
    if (clean.size() > 1 && clean[0] == '0' && std::string_view("xXoObB").find(clean[1]) != std::string_view::npos) {
        int base = (clean[1] == 'x' || clean[1] == 'X') ? 16 : (clean[1] == 'o' || clean[1] == 'O') ? 8 : 2;
        value.type = ConstantValue::Type::Int;
        value.text = to_decimal(std::string_view(clean).substr(2), base);
        return value;
    }
    if (clean.find_first_of(".eE") != std::string::npos) {
        value.type = ConstantValue::Type::Float;
        value.number = std::strtod(clean.c_str(), nullptr);
        return value;
    }
    value.type = ConstantValue::Type::Int;
    auto nz = clean.find_first_not_of('0');
    value.text = nz == std::string::npos ? "0" : clean.substr(nz);
    return value;
}

std::string decode_str_escapes(std::string_view body, std::size_t offset) {
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    auto fail = [&](std::size_t at, const std::string& what) -> void {
        throw SyntaxError(offset + at, "(unicode error) 'unicodeescape' codec can't decode bytes: " + what);
    };
    while (i < body.size()) {
        char c = body[i];
        if (c != '\\') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t esc = i;
        ++i;
        if (i >= body.size()) fail(esc, "\\ at end of string");
        char e = body[i++];
        switch (e) {
            case '\n': break;
            case '\r':
                if (i < body.size() && body[i] == '\n') ++i;
                break;
            case '\\': out.push_back('\\'); break;
            case '\'': out.push_back('\''); break;
            case '"': out.push_back('"'); break;
            case 'a': out.push_back('\a'); break;
            case 'b': out.push_back('\b'); break;
            case 'f': out.push_back('\f'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            case 't': out.push_back('\t'); break;
            case 'v': out.push_back('\v'); break;
            case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': {
                char32_t v = static_cast<char32_t>(e - '0');
                for (int k = 0; k < 2 && i < body.size() && body[i] >= '0' && body[i] <= '7'; ++k) {
                    v = v * 8 + static_cast<char32_t>(body[i++] - '0');
                }
                unicode::append_utf8(out, v);
                break;
            }
            case 'x': case 'u': case 'U': {
                int width = e == 'x' ? 2 : e == 'u' ? 4 : 8;
                char32_t v = 0;
                for (int k = 0; k < width; ++k) {
                    if (i >= body.size() || hex_value(body[i]) < 0) {
                        fail(esc, std::string("truncated \\") + e + " escape");
                    }
                    v = v * 16 + static_cast<char32_t>(hex_value(body[i++]));
                }
                if (v > 0x10FFFF) fail(esc, "illegal Unicode character");
                unicode::append_utf8(out, v);
                break;
            }
            case 'N': {
                if (i >= body.size() || body[i] != '{') fail(esc, "malformed \\N character escape");
                auto close = body.find('}', i);
                if (close == std::string_view::npos || close == i + 1) fail(esc, "malformed \\N character escape");
                std::string name(body.substr(i + 1, close - i - 1));
                for (char& ch : name) {
                    if (ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 32);
                }
                auto cp = unicode::lookup_name(name);
                if (!cp) fail(esc, "unknown Unicode character name");
                unicode::append_utf8(out, *cp);
                i = close + 1;
                break;
            }
            default:
                // Unrecognized escapes are kept verbatim.
                out.push_back('\\');
                --i;
                break;
        }
    }
    return out;
}

std::string decode_bytes_escapes(std::string_view body, std::size_t offset, bool raw) {
    for (std::size_t k = 0; k < body.size(); ++k) {
        if (static_cast<unsigned char>(body[k]) >= 0x80) {
            throw SyntaxError(offset + k, "bytes can only contain ASCII literal characters");
        }
    }
    if (raw) return std::string(body);
    std::string out;
    std::size_t i = 0;
    while (i < body.size()) {
        char c = body[i];
        if (c != '\\') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t esc = i;
        ++i;
        if (i >= body.size()) throw SyntaxError(offset + esc, "(value error) \\ at end of string");
        char e = body[i++];
        switch (e) {
            case '\n': break;
            case '\r':
                if (i < body.size() && body[i] == '\n') ++i;
                break;
            case '\\': out.push_back('\\'); break;
            case '\'': out.push_back('\''); break;
            case '"': out.push_back('"'); break;
            case 'a': out.push_back('\a'); break;
            case 'b': out.push_back('\b'); break;
            case 'f': out.push_back('\f'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            case 't': out.push_back('\t'); break;
            case 'v': out.push_back('\v'); break;
            case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': {
                unsigned v = static_cast<unsigned>(e - '0');
                for (int k = 0; k < 2 && i < body.size() && body[i] >= '0' && body[i] <= '7'; ++k) {
                    v = v * 8 + static_cast<unsigned>(body[i++] - '0');
                }
                out.push_back(static_cast<char>(v & 0xFF));
                break;
            }
            case 'x': {
                if (i + 1 >= body.size() + 0 || hex_value(body[i]) < 0 || i + 1 >= body.size() || hex_value(body[i + 1]) < 0) {
                    throw SyntaxError(offset + esc, "(value error) invalid \\x escape");
                }
                out.push_back(static_cast<char>(hex_value(body[i]) * 16 + hex_value(body[i + 1])));
                i += 2;
                break;
            }
            default:
                out.push_back('\\');
                --i;
                break;
        }
    }
    return out;
}

}  // namespace codecorpus::syntax::detail
