// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "codecorpus/corpus/documents.hpp"
#include "codecorpus/syntax/analysis.hpp"
#include "codecorpus/tokenizer/bpe.hpp"
#include "codecorpus/transforms/transforms.hpp"

namespace codecorpus::corpus {

using tokenizer::BpeVocabulary;
using tokenizer::TokenId;

inline constexpr std::uint64_t kDefaultTokenBudget = 200'000'000;
inline constexpr std::size_t kDefaultSequenceLength = 2048;
inline constexpr std::size_t kMaxRowsPerShard = 1'000'000;

/// Corpus indices in the order a seed visits them (Fisher-Yates over
/// mt19937_64 seeded with derive_seed(seed, "sample")).
std::vector<std::size_t> shuffled_order(std::size_t count, std::uint64_t seed);

struct Sample {
    std::vector<std::size_t> indices;  // corpus indices, in sampled order
    std::uint64_t tokens = 0;
    bool exhausted = false;  // the corpus ran out before the budget was reached
};

/// Takes documents in shuffled order until their encoded token count first
/// reaches or exceeds `token_budget` (which must be positive).
Sample sample_documents(const std::vector<Document>& docs, const BpeVocabulary& vocab, std::uint64_t token_budget,
                        std::uint64_t seed, unsigned workers = 1);

// Same rule over known lengths, visiting them in the given order.
Sample take_until_budget(std::span<const std::size_t> order, std::span<const std::uint64_t> lengths,
                         std::uint64_t token_budget);

struct Stratification {
    // Shallow, Middle, Deep members as corpus indices in corpus order.
    std::array<std::vector<std::size_t>, 3> bins;
    std::vector<std::size_t> overflow;
    std::vector<std::size_t> failed;
    std::vector<std::size_t> depths;  // per document; 0 when parsing failed

    const std::vector<std::size_t>& members(syntax::DepthBin bin) const;
};

/// Places every parseable document in the bin of its depth. Failures and
/// documents deeper than the last bin are listed separately.
Stratification stratify_by_depth(const std::vector<Document>& docs, const syntax::DepthBins& bins = {},
                                 unsigned workers = 1);

/// Fixed-length rows cut from the concatenated token stream.
struct PackedDataset {
    std::size_t sequence_length = kDefaultSequenceLength;
    std::vector<TokenId> tokens;  // row-major, sequences() * sequence_length ids
    std::uint64_t tokens_emitted = 0;  // stream length including delimiters
    std::size_t dropped_tail = 0;

    std::size_t sequences() const { return sequence_length ? tokens.size() / sequence_length : 0; }
    std::span<const TokenId> row(std::size_t i) const {
        return {tokens.data() + i * sequence_length, sequence_length};
    }
};

/// Concatenates the documents with one end-of-text id after each (the last
/// one included), cuts the stream into rows of `sequence_length` and drops
/// the incomplete final row. `sequence_length` must be at least 2.
PackedDataset pack(const std::vector<std::vector<TokenId>>& documents, TokenId end_of_text, std::size_t sequence_length);
PackedDataset pack(const std::vector<Document>& documents, const BpeVocabulary& vocab, std::size_t sequence_length,
                   unsigned workers = 1);

struct ShardInfo {
    std::string file;
    std::size_t rows = 0;
    std::string fnv1a64;
};

struct CorpusManifest {
    std::string source;
    std::uint64_t token_budget = kDefaultTokenBudget;
    std::uint64_t sample_seed = 0;
    transforms::TransformSpec transform;
    std::optional<syntax::DepthBin> depth_bin;
    syntax::DepthBins bins;
    std::size_t sequence_length = kDefaultSequenceLength;
    std::size_t documents_examined = 0;
    std::size_t documents_used = 0;
    std::size_t parse_failures = 0;
    std::size_t transform_failures = 0;
    std::size_t outside_bin = 0;
    bool budget_exhausted = false;
    std::uint64_t sampled_tokens = 0;  // source-text tokens counted against the budget
    std::uint64_t tokens_emitted = 0;
    std::uint64_t sequences_emitted = 0;
    std::uint64_t dropped_tail = 0;
    TokenId end_of_text_id = 0;
    std::vector<std::string> document_ids;
    std::vector<ShardInfo> shards;

    nlohmann::ordered_json to_json() const;
};

struct BuiltDataset {
    PackedDataset data;
    CorpusManifest manifest;
};

struct BuildOptions {
    std::string source;
    std::uint64_t token_budget = kDefaultTokenBudget;
    std::uint64_t sample_seed = 0;
    // Base seed of the Scrambled/Randomized draws. Each document uses
    // derive_seed(transform_seed, document id).
    std::uint64_t transform_seed = 0;
    std::size_t sequence_length = kDefaultSequenceLength;
    // Keep only documents in this bin (implies parsing).
    std::optional<syntax::DepthBin> depth_bin;
    syntax::DepthBins bins;
    // Skip documents that do not parse even for Raw output. Always on when
    // a non-Raw mode or a depth bin is requested.
    bool require_parse = false;
    unsigned workers = 1;
};

/// Samples once, then emits one packed dataset per mode from that sample.
///
/// Documents are visited in shuffled order. A document is skipped (and
/// counted) when it fails to parse, when any requested transform cannot be
/// printed back, or when it falls outside the requested depth bin; the
/// rest are taken until their source-text token count first reaches the
/// budget. Every mode therefore sees the same documents in the same order.
std::vector<BuiltDataset> build_datasets(const std::vector<Document>& docs, const BpeVocabulary& vocab,
                                         const std::vector<transforms::TransformMode>& modes,
                                         const BuildOptions& options);

/// Raw, CF, CF+S and CF+R datasets over one shared sample.
std::array<BuiltDataset, 4> build_ablation_corpora(const std::vector<Document>& docs, const BpeVocabulary& vocab,
                                                   const BuildOptions& options);

/// Per-document transform for the non-Raw modes: parse, apply, unparse,
/// and end non-empty output with a newline.
/// Raw returns the text unchanged. Throws std::runtime_error when the text
/// does not parse or the result cannot be printed.
std::string transform_text(const Document& doc, const transforms::TransformSpec& base);

/// Writes shard_NNNNN.bin files (little-endian u32 ids, at most
/// `max_rows_per_shard` rows each) and manifest.json into `dir`, recording
/// the shards in the manifest.
void write_dataset(const std::filesystem::path& dir, BuiltDataset& dataset,
                   std::size_t max_rows_per_shard = kMaxRowsPerShard);

/// Reads back every row of the shards listed in a manifest.
std::vector<TokenId> read_shards(const std::filesystem::path& dir, const nlohmann::json& manifest);

}  // namespace codecorpus::corpus
