// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace codecorpus::tokenizer {

using TokenId = std::uint32_t;

inline constexpr std::string_view kEndOfText = "<|endoftext|>";

class VocabularyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Byte-level BPE vocabulary in the GPT-2 interchange format.
///
/// Tokens are kept in their byte-level display form (bytes mapped to
/// printable code points, e.g. a space is "Ġ"), exactly as vocab.json and
/// merges.txt spell them. Immutable after construction, so one instance can
/// serve any number of threads.
class BpeVocabulary {
public:
    /// `vocab_json` is the text of vocab.json, `merges_text` that of
    /// merges.txt (an optional "#version" header line, then one "a b" pair
    /// per line). Throws VocabularyError on malformed input.
    BpeVocabulary(std::string_view vocab_json, std::string_view merges_text);

    std::size_t size() const { return tokens_.size(); }
    std::size_t merge_count() const { return merge_count_; }
    TokenId end_of_text_id() const { return end_of_text_id_; }

    // Display-form token text for an id; throws std::out_of_range.
    const std::string& token(TokenId id) const;
    // Id of a display-form token, or -1.
    std::int64_t find(std::string_view token) const;

    /// Byte-level BPE over the GPT-2 pre-tokenizer split. Never yields the
    /// end-of-text id for "<|endoftext|>" in the text; only the packer
    /// inserts it.
    std::vector<TokenId> encode(std::string_view text) const;

    /// Inverse of encode; throws std::out_of_range on an unknown id.
    std::string decode(const std::vector<TokenId>& ids) const;

private:
    void bpe(std::string_view piece, std::vector<TokenId>& out) const;

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
    std::unordered_map<std::string, std::uint32_t> ranks_;  // "left right" -> rank
    std::size_t merge_count_ = 0;
    TokenId end_of_text_id_ = 0;
};

/// Reads vocab.json and merges.txt from disk. Throws VocabularyError when a
/// file is missing or malformed or "<|endoftext|>" is absent.
BpeVocabulary load_vocabulary(const std::filesystem::path& vocab_path, const std::filesystem::path& merges_path);

/// GPT-2 pre-tokenization: splits `text` into the pieces matched by
/// 's|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+
/// Bytes that are not valid UTF-8 are treated as one-byte symbols.
std::vector<std::string_view> pretokenize(std::string_view text);

}  // namespace codecorpus::tokenizer
