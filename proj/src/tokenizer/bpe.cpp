// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/tokenizer/bpe.hpp"

#include <array>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "codecorpus/common/unicode.hpp"

namespace codecorpus::tokenizer {

namespace {

// GPT-2's reversible byte <-> code point table: printable Latin-1 bytes map
// to themselves, the remaining 68 bytes to U+0100 onwards.
struct ByteTable {
    std::array<std::string, 256> encode;
    std::unordered_map<char32_t, unsigned char> decode;

    ByteTable() {
        auto keeps = [](int b) { return (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF); };
        char32_t next = 256;
        for (int b = 0; b < 256; ++b) {
            char32_t cp = keeps(b) ? static_cast<char32_t>(b) : next++;
            unicode::append_utf8(encode[b], cp);
            decode.emplace(cp, static_cast<unsigned char>(b));
        }
    }
};

const ByteTable& byte_table() {
    static const ByteTable table;
    return table;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw VocabularyError(fmt::format("cannot open {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// True when every code point of `text` is one of the 256 byte symbols.
bool is_byte_form(std::string_view text) {
    const auto& table = byte_table();
    for (std::size_t pos = 0; pos < text.size();) {
        auto d = unicode::decode(text, pos);
        if (d.length == 0 || !table.decode.count(d.cp)) return false;
        pos += d.length;
    }
    return !text.empty();
}

enum class CharClass : std::uint8_t { Letter, Number, Space, Other };

struct Char {
    std::size_t offset;
    std::size_t length;
    CharClass cls;
};

std::vector<Char> classify(std::string_view text) {
    std::vector<Char> chars;
    chars.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) {
        auto d = unicode::decode(text, pos);
        if (d.length == 0) {
            chars.push_back({pos, 1, CharClass::Other});
            ++pos;
            continue;
        }
        CharClass cls = unicode::is_letter(d.cp)        ? CharClass::Letter
                        : unicode::is_number(d.cp)      ? CharClass::Number
                        : unicode::is_white_space(d.cp) ? CharClass::Space
                                                        : CharClass::Other;
        chars.push_back({pos, d.length, cls});
        pos += d.length;
    }
    return chars;
}

std::size_t contraction_length(std::string_view rest) {
    for (std::string_view c : {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"})
        if (rest.substr(0, c.size()) == c) return c.size();
    return 0;
}

}  // namespace

std::vector<std::string_view> pretokenize(std::string_view text) {
    std::vector<std::string_view> pieces;
    std::vector<Char> chars = classify(text);
    const std::size_t n = chars.size();
    auto offset = [&](std::size_t i) { return i < n ? chars[i].offset : text.size(); };
    auto emit = [&](std::size_t from, std::size_t to) {
        pieces.push_back(text.substr(offset(from), offset(to) - offset(from)));
    };
    auto run_end = [&](std::size_t i, CharClass cls) {
        while (i < n && chars[i].cls == cls) ++i;
        return i;
    };

    std::size_t i = 0;
    while (i < n) {
        if (text[chars[i].offset] == '\'') {
            std::size_t len = contraction_length(text.substr(chars[i].offset));
            if (len) {
                emit(i, i + len);  // contractions are ASCII: one char per byte
                i += len;
                continue;
            }
        }
        // " ?\p{L}+", " ?\p{N}+", " ?[^\s\p{L}\p{N}]+"
        std::size_t k = i + (text[chars[i].offset] == ' ' && chars[i].length == 1 ? 1 : 0);
        if (k < n && chars[k].cls != CharClass::Space) {
            std::size_t end = run_end(k, chars[k].cls);
            emit(i, end);
            i = end;
            continue;
        }
        // "\s+(?!\S)" backs off one char when the run is followed by a
        // non-space, so that char can lead the next piece; "\s+" takes a
        // single space otherwise.
        std::size_t end = run_end(i, CharClass::Space);
        if (end < n && end - i > 1) --end;
        emit(i, end);
        i = end;
    }
    return pieces;
}

BpeVocabulary::BpeVocabulary(std::string_view vocab_json, std::string_view merges_text) {
    nlohmann::json table;
    try {
        table = nlohmann::json::parse(vocab_json);
    } catch (const nlohmann::json::exception& e) {
        throw VocabularyError(fmt::format("vocab.json is not valid JSON: {}", e.what()));
    }
    if (!table.is_object() || table.empty()) throw VocabularyError("vocab.json must be a non-empty object");

    tokens_.resize(table.size());
    std::vector<bool> seen(table.size(), false);
    for (auto it = table.begin(); it != table.end(); ++it) {
        if (!it.value().is_number_unsigned())
            throw VocabularyError(fmt::format("vocab.json: id of '{}' is not a non-negative integer", it.key()));
        auto id = it.value().get<std::uint64_t>();
        if (id >= table.size() || seen[id])
            throw VocabularyError(fmt::format("vocab.json: ids must be dense 0..{} (bad id {})", table.size() - 1, id));
        seen[id] = true;
        tokens_[id] = it.key();
        ids_.emplace(it.key(), static_cast<TokenId>(id));
    }

    auto eot = ids_.find(std::string(kEndOfText));
    if (eot == ids_.end()) throw VocabularyError("vocabulary has no \"<|endoftext|>\" token");
    end_of_text_id_ = eot->second;

    for (const auto& symbol : byte_table().encode)
        if (!ids_.count(symbol)) throw VocabularyError(fmt::format("vocabulary lacks byte symbol '{}'", symbol));

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < merges_text.size()) {
        std::size_t eol = merges_text.find('\n', pos);
        std::string_view line = merges_text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? merges_text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || (line_no == 1 && line.substr(0, 8) == "#version")) continue;
        std::size_t space = line.find(' ');
        if (space == std::string_view::npos || line.find(' ', space + 1) != std::string_view::npos)
            throw VocabularyError(fmt::format("merges.txt:{}: expected two space-separated symbols", line_no));
        std::string_view left = line.substr(0, space);
        std::string_view right = line.substr(space + 1);
        if (!is_byte_form(left) || !is_byte_form(right))
            throw VocabularyError(fmt::format("merges.txt:{}: symbol is not in byte-level form", line_no));
        ranks_.emplace(std::string(line), static_cast<std::uint32_t>(merge_count_));
        ++merge_count_;
    }
}

const std::string& BpeVocabulary::token(TokenId id) const {
    if (id >= tokens_.size()) throw std::out_of_range(fmt::format("unknown token id {}", id));
    return tokens_[id];
}

std::int64_t BpeVocabulary::find(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void BpeVocabulary::bpe(std::string_view piece, std::vector<TokenId>& out) const {
    const auto& table = byte_table();
    std::vector<std::string> word;
    word.reserve(piece.size());
    for (unsigned char b : piece) word.push_back(table.encode[b]);

    constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
    std::string key;
    while (word.size() > 1) {
        std::uint32_t best = kNone;
        std::size_t best_at = 0;
        for (std::size_t i = 0; i + 1 < word.size(); ++i) {
            key.assign(word[i]).append(" ").append(word[i + 1]);
            auto it = ranks_.find(key);
            if (it != ranks_.end() && it->second < best) {
                best = it->second;
                best_at = i;
            }
        }
        if (best == kNone) break;

        // Merge every non-overlapping occurrence of the best pair, left to right.
        const std::string first = word[best_at];
        const std::string second = word[best_at + 1];
        std::vector<std::string> merged;
        merged.reserve(word.size());
        for (std::size_t i = 0; i < word.size();) {
            if (i + 1 < word.size() && word[i] == first && word[i + 1] == second) {
                merged.push_back(first + second);
                i += 2;
            } else {
                merged.push_back(std::move(word[i]));
                ++i;
            }
        }
        word = std::move(merged);
    }

    for (const auto& symbol : word) {
        auto it = ids_.find(symbol);
        if (it == ids_.end()) throw VocabularyError(fmt::format("merged symbol '{}' is missing from vocab.json", symbol));
        out.push_back(it->second);
    }
}

std::vector<TokenId> BpeVocabulary::encode(std::string_view text) const {
    std::vector<TokenId> ids;
    for (std::string_view piece : pretokenize(text)) bpe(piece, ids);
    return ids;
}

std::string BpeVocabulary::decode(const std::vector<TokenId>& ids) const {
    const auto& table = byte_table();
    std::string out;
    for (TokenId id : ids) {
        const std::string& t = token(id);
        for (std::size_t pos = 0; pos < t.size();) {
            auto d = unicode::decode(t, pos);
            auto it = d.length ? table.decode.find(d.cp) : table.decode.end();
            if (it == table.decode.end()) {
                // Added tokens outside the byte alphabet decode as themselves.
                out.append(t, pos, d.length ? d.length : 1);
                pos += d.length ? d.length : 1;
                continue;
            }
            out += static_cast<char>(it->second);
            pos += d.length;
        }
    }
    return out;
}

BpeVocabulary load_vocabulary(const std::filesystem::path& vocab_path, const std::filesystem::path& merges_path) {
    return BpeVocabulary(read_file(vocab_path), read_file(merges_path));
}

}  // namespace codecorpus::tokenizer
