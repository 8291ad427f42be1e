// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/corpus/pipeline.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "codecorpus/common/hash.hpp"
#include "codecorpus/common/parallel.hpp"
#include "codecorpus/common/rng.hpp"
#include "codecorpus/syntax/parser.hpp"
#include "codecorpus/syntax/unparse.hpp"

namespace codecorpus::corpus {

namespace fs = std::filesystem;
using syntax::DepthBin;
using transforms::TransformMode;

namespace {

// Documents are processed in fixed-size batches so the work past the budget
// crossing stays bounded; the batch size does not affect results.
constexpr std::size_t kBatch = 256;

void check_budget(std::uint64_t budget) {
    if (budget == 0) throw std::invalid_argument("token budget must be positive");
}

}  // namespace

std::vector<std::size_t> shuffled_order(std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    Rng rng(derive_seed(seed, "sample"));
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

Sample take_until_budget(std::span<const std::size_t> order, std::span<const std::uint64_t> lengths,
                         std::uint64_t token_budget) {
    check_budget(token_budget);
    Sample sample;
    for (std::size_t index : order) {
        sample.indices.push_back(index);
        sample.tokens += lengths[index];
        if (sample.tokens >= token_budget) return sample;
    }
    sample.exhausted = true;
    return sample;
}

Sample sample_documents(const std::vector<Document>& docs, const BpeVocabulary& vocab, std::uint64_t token_budget,
                        std::uint64_t seed, unsigned workers) {
    check_budget(token_budget);
    std::vector<std::size_t> order = shuffled_order(docs.size(), seed);
    std::vector<std::uint64_t> lengths(docs.size(), 0);
    Sample sample;
    for (std::size_t pos = 0; pos < order.size(); pos += kBatch) {
        std::size_t n = std::min(kBatch, order.size() - pos);
        parallel_for(n, workers, [&](std::size_t i) {
            std::size_t index = order[pos + i];
            lengths[index] = vocab.encode(docs[index].text).size();
        });
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t index = order[pos + i];
            sample.indices.push_back(index);
            sample.tokens += lengths[index];
            if (sample.tokens >= token_budget) return sample;
        }
    }
    sample.exhausted = true;
    return sample;
}

const std::vector<std::size_t>& Stratification::members(DepthBin bin) const {
    if (bin == DepthBin::Overflow) return overflow;
    return bins[static_cast<std::size_t>(bin)];
}

Stratification stratify_by_depth(const std::vector<Document>& docs, const syntax::DepthBins& bins, unsigned workers) {
    Stratification out;
    out.depths.assign(docs.size(), 0);
    parallel_for(docs.size(), workers, [&](std::size_t i) {
        auto result = syntax::parse(docs[i].text, docs[i].id);
        if (result) out.depths[i] = syntax::depth(result.tree());
    });
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (out.depths[i] == 0) {
            out.failed.push_back(i);
            continue;
        }
        DepthBin bin = syntax::classify_depth(out.depths[i], bins);
        (bin == DepthBin::Overflow ? out.overflow : out.bins[static_cast<std::size_t>(bin)]).push_back(i);
    }
    return out;
}

PackedDataset pack(const std::vector<std::vector<TokenId>>& documents, TokenId end_of_text,
                   std::size_t sequence_length) {
    if (sequence_length < 2) throw std::invalid_argument("sequence length must be at least 2");
    PackedDataset out;
    out.sequence_length = sequence_length;
    for (const auto& doc : documents) {
        out.tokens.insert(out.tokens.end(), doc.begin(), doc.end());
        out.tokens.push_back(end_of_text);
    }
    out.tokens_emitted = out.tokens.size();
    out.dropped_tail = out.tokens.size() % sequence_length;
    out.tokens.resize(out.tokens.size() - out.dropped_tail);
    return out;
}

PackedDataset pack(const std::vector<Document>& documents, const BpeVocabulary& vocab, std::size_t sequence_length,
                   unsigned workers) {
    std::vector<std::vector<TokenId>> ids(documents.size());
    parallel_for(documents.size(), workers, [&](std::size_t i) { ids[i] = vocab.encode(documents[i].text); });
    return pack(ids, vocab.end_of_text_id(), sequence_length);
}

namespace {

// Printed modules end with a newline, like any source file on disk.
std::string as_source_file(std::string text) {
    if (!text.empty()) text += '\n';
    return text;
}

}  // namespace

std::string transform_text(const Document& doc, const transforms::TransformSpec& base) {
    if (base.mode == TransformMode::Raw) return doc.text;
    auto parsed = syntax::parse(doc.text, doc.id);
    if (!parsed) {
        const auto& f = parsed.failure();
        throw std::runtime_error(fmt::format("{}:{}:{}: {}", doc.id, f.line, f.column, f.message));
    }
    transforms::TransformSpec spec{base.mode, derive_seed(base.seed, doc.id)};
    return as_source_file(syntax::unparse(transforms::apply(spec, parsed.tree())));
}

namespace {

enum class Status : std::uint8_t { Ok, ParseFailure, TransformFailure, OutsideBin };

struct Processed {
    Status status = Status::Ok;
    std::uint64_t source_tokens = 0;
    std::vector<std::vector<TokenId>> ids;  // one per requested mode
};

Processed process(const Document& doc, const BpeVocabulary& vocab, const std::vector<TransformMode>& modes,
                  const BuildOptions& options, bool need_parse) {
    Processed p;
    std::optional<syntax::SyntaxTree> tree;
    if (need_parse) {
        auto parsed = syntax::parse(doc.text, doc.id);
        if (!parsed) {
            p.status = Status::ParseFailure;
            return p;
        }
        if (options.depth_bin && syntax::classify_depth(syntax::depth(parsed.tree()), options.bins) != *options.depth_bin) {
            p.status = Status::OutsideBin;
            return p;
        }
        tree = std::move(parsed).tree();
    }

    std::vector<TokenId> source_ids = vocab.encode(doc.text);
    p.source_tokens = source_ids.size();
    for (TransformMode mode : modes) {
        if (mode == TransformMode::Raw) {
            p.ids.push_back(source_ids);
            continue;
        }
        std::string text;
        try {
            transforms::TransformSpec spec{mode, derive_seed(options.transform_seed, doc.id)};
            text = as_source_file(syntax::unparse(transforms::apply(spec, *tree)));
        } catch (const std::runtime_error&) {
            // f-string contents that cannot be printed back
            p.status = Status::TransformFailure;
            p.ids.clear();
            return p;
        }
        p.ids.push_back(vocab.encode(text));
    }
    return p;
}

}  // namespace

std::vector<BuiltDataset> build_datasets(const std::vector<Document>& docs, const BpeVocabulary& vocab,
                                         const std::vector<TransformMode>& modes, const BuildOptions& options) {
    check_budget(options.token_budget);
    if (options.sequence_length < 2) throw std::invalid_argument("sequence length must be at least 2");
    bool need_parse = options.require_parse || options.depth_bin.has_value();
    for (TransformMode mode : modes) need_parse = need_parse || mode != TransformMode::Raw;

    CorpusManifest common;
    common.source = options.source;
    common.token_budget = options.token_budget;
    common.sample_seed = options.sample_seed;
    common.depth_bin = options.depth_bin;
    common.bins = options.bins;
    common.sequence_length = options.sequence_length;
    common.end_of_text_id = vocab.end_of_text_id();

    std::vector<std::size_t> order = shuffled_order(docs.size(), options.sample_seed);
    std::vector<std::vector<std::vector<TokenId>>> per_mode(modes.size());
    bool crossed = false;
    for (std::size_t pos = 0; pos < order.size() && !crossed; pos += kBatch) {
        std::size_t n = std::min(kBatch, order.size() - pos);
        std::vector<Processed> batch(n);
        parallel_for(n, options.workers, [&](std::size_t i) {
            batch[i] = process(docs[order[pos + i]], vocab, modes, options, need_parse);
        });
        for (std::size_t i = 0; i < n && !crossed; ++i) {
            Processed& p = batch[i];
            ++common.documents_examined;
            switch (p.status) {
                case Status::ParseFailure: ++common.parse_failures; continue;
                case Status::TransformFailure: ++common.transform_failures; continue;
                case Status::OutsideBin: ++common.outside_bin; continue;
                case Status::Ok: break;
            }
            common.document_ids.push_back(docs[order[pos + i]].id);
            common.sampled_tokens += p.source_tokens;
            for (std::size_t m = 0; m < modes.size(); ++m) per_mode[m].push_back(std::move(p.ids[m]));
            crossed = common.sampled_tokens >= options.token_budget;
        }
    }
    common.budget_exhausted = !crossed;
    common.documents_used = common.document_ids.size();

    std::vector<BuiltDataset> out;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        BuiltDataset ds;
        ds.data = pack(per_mode[m], vocab.end_of_text_id(), options.sequence_length);
        per_mode[m].clear();
        ds.manifest = common;
        ds.manifest.transform = {modes[m], options.transform_seed};
        ds.manifest.tokens_emitted = ds.data.tokens_emitted;
        ds.manifest.sequences_emitted = ds.data.sequences();
        ds.manifest.dropped_tail = ds.data.dropped_tail;
        out.push_back(std::move(ds));
    }
    return out;
}

std::array<BuiltDataset, 4> build_ablation_corpora(const std::vector<Document>& docs, const BpeVocabulary& vocab,
                                                   const BuildOptions& options) {
    auto built = build_datasets(docs, vocab,
                                {TransformMode::Raw, TransformMode::CommentFree, TransformMode::CommentFreeScrambled,
                                 TransformMode::CommentFreeRandomized},
                                options);
    return {std::move(built[0]), std::move(built[1]), std::move(built[2]), std::move(built[3])};
}

nlohmann::ordered_json CorpusManifest::to_json() const {
    nlohmann::ordered_json j;
    j["source"] = source;
    j["token_budget"] = token_budget;
    j["sample_seed"] = sample_seed;
    j["transform"] = transform.to_json();
    j["transform"]["per_document_seed"] = "derive_seed(seed, document id)";
    j["depth_bin"] = depth_bin ? nlohmann::ordered_json(std::string(syntax::bin_name(*depth_bin))) : nullptr;
    j["depth_bins"] = {{"shallow_max", bins.shallow_max}, {"middle_max", bins.middle_max}, {"deep_max", bins.deep_max}};
    j["sequence_length"] = sequence_length;
    j["documents_examined"] = documents_examined;
    j["documents_used"] = documents_used;
    j["parse_failures"] = parse_failures;
    j["transform_failures"] = transform_failures;
    j["outside_bin"] = outside_bin;
    j["budget_exhausted"] = budget_exhausted;
    j["sampled_tokens"] = sampled_tokens;
    j["tokens_emitted"] = tokens_emitted;
    j["sequences_emitted"] = sequences_emitted;
    j["dropped_tail"] = dropped_tail;
    j["end_of_text_id"] = end_of_text_id;
    j["document_ids"] = document_ids;
    auto shard_list = nlohmann::ordered_json::array();
    for (const auto& s : shards) shard_list.push_back({{"file", s.file}, {"rows", s.rows}, {"fnv1a64", s.fnv1a64}});
    j["shards"] = std::move(shard_list);
    return j;
}

namespace {

std::string little_endian_bytes(std::span<const TokenId> ids) {
    std::string out(ids.size() * 4, '\0');
    for (std::size_t i = 0; i < ids.size(); ++i) {
        TokenId v = ids[i];
        for (int b = 0; b < 4; ++b) out[i * 4 + b] = static_cast<char>((v >> (8 * b)) & 0xFF);
    }
    return out;
}

}  // namespace

void write_dataset(const fs::path& dir, BuiltDataset& dataset, std::size_t max_rows_per_shard) {
    if (max_rows_per_shard == 0) throw std::invalid_argument("max rows per shard must be positive");
    fs::create_directories(dir);
    const auto& data = dataset.data;
    dataset.manifest.shards.clear();
    for (std::size_t first = 0, index = 0; first < data.sequences(); first += max_rows_per_shard, ++index) {
        std::size_t rows = std::min(max_rows_per_shard, data.sequences() - first);
        std::string bytes = little_endian_bytes(
            std::span<const TokenId>(data.tokens.data() + first * data.sequence_length, rows * data.sequence_length));
        std::string name = fmt::format("shard_{:05d}.bin", index);
        write_text_file(dir / name, bytes);
        dataset.manifest.shards.push_back({name, rows, to_hex(fnv1a64(bytes))});
    }
    write_text_file(dir / kManifestName, dataset.manifest.to_json().dump(2) + "\n");
}

std::vector<TokenId> read_shards(const fs::path& dir, const nlohmann::json& manifest) {
    std::vector<TokenId> ids;
    for (const auto& shard : manifest.at("shards")) {
        std::string bytes = read_text_file(dir / shard.at("file").get<std::string>());
        if (bytes.size() % 4) throw DataError(fmt::format("shard {} has a partial id", shard.at("file").dump()));
        for (std::size_t i = 0; i < bytes.size(); i += 4) {
            TokenId v = 0;
            for (int b = 0; b < 4; ++b) v |= static_cast<TokenId>(static_cast<unsigned char>(bytes[i + b])) << (8 * b);
            ids.push_back(v);
        }
    }
    return ids;
}

}  // namespace codecorpus::corpus
