// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/cli/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "codecorpus/common/hash.hpp"
#include "codecorpus/common/parallel.hpp"
#include "codecorpus/corpus/documents.hpp"
#include "codecorpus/corpus/pipeline.hpp"
#include "codecorpus/eval/harness.hpp"
#include "codecorpus/syntax/analysis.hpp"
#include "codecorpus/syntax/parser.hpp"
#include "codecorpus/tokenizer/bpe.hpp"
#include "codecorpus/transforms/transforms.hpp"

namespace codecorpus::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kVersion = "0.1.0";

// Thrown for inconsistent but well-formed arguments found after parsing.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config files. A file whose first non-blank byte is '{' is JSON, anything
// else goes to CLI11's TOML reader. JSON objects become sections, so
// {"pack": {"budget": 5}} is the same as "[pack]\nbudget = 5".

class JsonOrTomlConfig : public CLI::ConfigTOML {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
        auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream toml(text);
            return CLI::ConfigTOML::from_config(toml);
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(fmt::format("config file is not valid JSON: {}", e.what()));
        }
        std::vector<CLI::ConfigItem> items;
        flatten(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    }

    static void flatten(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& out) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto next = parents;
                next.push_back(key);
                // CLI11 expects section markers around nested items.
                out.push_back({next, "++", {}});
                flatten(value, next, out);
                out.push_back({next, "--", {}});
                continue;
            }
            CLI::ConfigItem item{parents, key, {}};
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            out.push_back(std::move(item));
        }
    }
};

// ---------------------------------------------------------------------------
// Structured log lines on stderr, one JSON object each.

bool g_quiet = false;

void log_event(std::string_view level, std::string_view event, ordered_json fields = ordered_json::object()) {
    if (g_quiet && level == "info") return;
    ordered_json line;
    line["level"] = level;
    line["event"] = event;
    for (auto& [k, v] : fields.items()) line[k] = v;
    std::cerr << line.dump() << '\n';
}

// ---------------------------------------------------------------------------

struct CommonOptions {
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string config;
};

// The output directory is not recorded: the manifest lives inside it, and
// leaving it out keeps reruns into different directories byte-comparable.
std::string dump_manifest(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json manifest_header(std::string_view subcommand) {
    ordered_json j;
    j["tool"] = "codecorpus";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    return j;
}

ordered_json bins_json(const syntax::DepthBins& b) {
    return {{"shallow_max", b.shallow_max}, {"middle_max", b.middle_max}, {"deep_max", b.deep_max}};
}

syntax::DepthBins make_bins(const std::vector<std::size_t>& v) {
    if (v.size() != 3 || !(v[0] < v[1] && v[1] < v[2]))
        throw UsageError("--bins needs three increasing depths, e.g. 7,11,20");
    return {v[0], v[1], v[2]};
}

syntax::DepthBin parse_bin(const std::string& name) {
    for (auto b : {syntax::DepthBin::Shallow, syntax::DepthBin::Middle, syntax::DepthBin::Deep})
        if (syntax::bin_name(b) == name) return b;
    throw UsageError(fmt::format("unknown depth bin '{}' (expected shallow, middle or deep)", name));
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Inputs are recorded with a content hash so a manifest pins the data it saw.
ordered_json describe_corpus(const fs::path& input, const std::vector<corpus::Document>& docs) {
    std::uint64_t h = kFnvOffset;
    for (const auto& d : docs) {
        h = fnv1a64(d.id, h);
        h = fnv1a64(std::string_view("\0", 1), h);
        h = fnv1a64(d.text, h);
        h = fnv1a64(std::string_view("\0", 1), h);
    }
    return {{"path", input.generic_string()}, {"documents", docs.size()}, {"fnv1a64", to_hex(h)}};
}

ordered_json describe_file(const fs::path& path) {
    return {{"path", path.generic_string()}, {"fnv1a64", to_hex(fnv1a64(corpus::read_text_file(path)))}};
}

// Output corpora keep the input's layout: a directory tree, or one JSONL
// file named after the subset.
void write_subset(const fs::path& out_dir, const std::string& name, corpus::CorpusFormat format,
                  const std::vector<corpus::Document>& docs) {
    if (format == corpus::CorpusFormat::Directory)
        corpus::write_corpus(out_dir / name, format, docs);
    else
        corpus::write_corpus(out_dir / (name + ".jsonl"), format, docs);
}

// ---------------------------------------------------------------------------
// profile

struct ProfileOptions {
    std::string input, output;
    bool histogram = false;
    std::vector<std::size_t> bins{7, 11, 20};
};

void cmd_profile(const ProfileOptions& o, const CommonOptions& common) {
    auto bins = make_bins(o.bins);
    auto docs = corpus::read_corpus(o.input);
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) texts.push_back(d.text);
    auto profile = syntax::depth_profile(texts, common.workers);

    std::array<std::size_t, 4> per_bin{};
    for (const auto& [d, count] : profile.histogram) per_bin[static_cast<std::size_t>(syntax::classify_depth(d, bins))] += count;

    ordered_json out = profile.to_json();
    out["bins"] = {{"shallow", per_bin[0]}, {"middle", per_bin[1]}, {"deep", per_bin[2]}, {"overflow", per_bin[3]}};
    corpus::write_text_file(fs::path(o.output) / "profile.json", out.dump(2) + "\n");

    auto m = manifest_header("profile");
    m["config"] = {{"input", o.input}, {"bins", bins_json(bins)}};
    m["input"] = describe_corpus(o.input, docs);
    m["outputs"] = {"profile.json"};
    corpus::write_text_file(fs::path(o.output) / corpus::kManifestName, dump_manifest(m));

    if (o.histogram) {
        std::size_t peak = 1;
        for (const auto& [d, c] : profile.histogram) peak = std::max(peak, c);
        fmt::print("depth  count\n");
        for (const auto& [d, c] : profile.histogram)
            fmt::print("{:>5}  {:>5}  {}\n", d, c, std::string((c * 50 + peak - 1) / peak, '#'));
        fmt::print("parsed {} failed {}\n", profile.parsed, profile.failed);
    }
    log_event("info", "profile.done", {{"parsed", profile.parsed}, {"failed", profile.failed}});
}

// ---------------------------------------------------------------------------
// stratify

struct StratifyOptions {
    std::string input, output;
    std::vector<std::size_t> bins{7, 11, 20};
};

void cmd_stratify(const StratifyOptions& o, const CommonOptions& common) {
    auto bins = make_bins(o.bins);
    auto format = corpus::detect_format(o.input);
    auto docs = corpus::read_corpus(o.input);
    auto strat = corpus::stratify_by_depth(docs, bins, common.workers);

    auto ids_of = [&](const std::vector<std::size_t>& idx) {
        std::vector<std::string> ids;
        for (auto i : idx) ids.push_back(docs[i].id);
        return ids;
    };
    auto m = manifest_header("stratify");
    m["config"] = {{"input", o.input}, {"bins", bins_json(bins)}};
    m["input"] = describe_corpus(o.input, docs);
    ordered_json subsets = ordered_json::object();
    for (auto b : {syntax::DepthBin::Shallow, syntax::DepthBin::Middle, syntax::DepthBin::Deep}) {
        std::vector<corpus::Document> members;
        for (auto i : strat.members(b)) members.push_back(docs[i]);
        std::string name(syntax::bin_name(b));
        write_subset(o.output, lower(name), format, members);
        subsets[lower(name)] = {{"documents", members.size()}, {"ids", ids_of(strat.members(b))}};
    }
    m["subsets"] = std::move(subsets);
    m["overflow"] = ids_of(strat.overflow);
    m["parse_failures"] = ids_of(strat.failed);
    corpus::write_text_file(fs::path(o.output) / corpus::kManifestName, dump_manifest(m));
    log_event("info", "stratify.done",
              {{"shallow", strat.bins[0].size()}, {"middle", strat.bins[1].size()}, {"deep", strat.bins[2].size()},
               {"overflow", strat.overflow.size()}, {"failed", strat.failed.size()}});
}

// ---------------------------------------------------------------------------
// transform

struct TransformOptions {
    std::string input, output, mode = "cf";
    std::uint64_t seed = 0;
};

void cmd_transform(const TransformOptions& o, const CommonOptions& common) {
    transforms::TransformSpec base;
    try {
        base = {transforms::parse_mode(o.mode), o.seed};
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    auto format = corpus::detect_format(o.input);
    auto docs = corpus::read_corpus(o.input);

    struct Outcome {
        std::string text;
        std::string error;
        bool reparsed = false;
    };
    std::vector<Outcome> outcomes(docs.size());
    parallel_for(docs.size(), common.workers, [&](std::size_t i) {
        try {
            outcomes[i].text = corpus::transform_text(docs[i], base);
            outcomes[i].reparsed = syntax::parse(outcomes[i].text).ok();
        } catch (const std::runtime_error& e) {
            outcomes[i].error = e.what();
        }
    });

    std::vector<corpus::Document> out_docs;
    ordered_json failures = ordered_json::array();
    std::size_t reparsed = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (!outcomes[i].error.empty()) {
            failures.push_back({{"id", docs[i].id}, {"error", outcomes[i].error}});
            continue;
        }
        reparsed += outcomes[i].reparsed ? 1 : 0;
        out_docs.push_back({docs[i].id, std::move(outcomes[i].text)});
    }
    if (format == corpus::CorpusFormat::Directory)
        corpus::write_corpus(o.output, format, out_docs);
    else
        write_subset(o.output, "corpus", format, out_docs);

    auto m = manifest_header("transform");
    m["config"] = {{"input", o.input}, {"transform", base.to_json()}};
    m["config"]["transform"]["per_document_seed"] = "derive_seed(seed, document id)";
    m["input"] = describe_corpus(o.input, docs);
    m["documents_written"] = out_docs.size();
    m["reparse_ok"] = reparsed;
    m["reparse_rate"] = out_docs.empty() ? 1.0 : static_cast<double>(reparsed) / static_cast<double>(out_docs.size());
    m["failures"] = std::move(failures);
    corpus::write_text_file(fs::path(o.output) / corpus::kManifestName, dump_manifest(m));
    log_event("info", "transform.done",
              {{"mode", o.mode}, {"written", out_docs.size()}, {"failed", docs.size() - out_docs.size()},
               {"reparse_ok", reparsed}});
}

// ---------------------------------------------------------------------------
// pack

struct PackOptions {
    std::string input, output, vocab, merges, mode = "raw", depth_bin;
    std::uint64_t budget = corpus::kDefaultTokenBudget;
    std::uint64_t sample_seed = 0, transform_seed = 0;
    std::size_t sequence_length = corpus::kDefaultSequenceLength;
    std::size_t max_rows = corpus::kMaxRowsPerShard;
    std::vector<std::size_t> bins{7, 11, 20};
    bool ablation = false, require_parse = false;
};

void cmd_pack(const PackOptions& o, const CommonOptions& common) {
    if (o.budget == 0) throw UsageError("--budget must be positive");
    if (o.sequence_length < 2) throw UsageError("--seq-len must be at least 2");
    if (o.max_rows == 0) throw UsageError("--max-rows-per-shard must be positive");
    std::vector<transforms::TransformMode> modes;
    try {
        if (o.ablation)
            modes = {transforms::TransformMode::Raw, transforms::TransformMode::CommentFree,
                     transforms::TransformMode::CommentFreeScrambled, transforms::TransformMode::CommentFreeRandomized};
        else
            modes = {transforms::parse_mode(o.mode)};
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    corpus::BuildOptions opts;
    opts.source = o.input;
    opts.token_budget = o.budget;
    opts.sample_seed = o.sample_seed;
    opts.transform_seed = o.transform_seed;
    opts.sequence_length = o.sequence_length;
    opts.bins = make_bins(o.bins);
    if (!o.depth_bin.empty()) opts.depth_bin = parse_bin(o.depth_bin);
    opts.require_parse = o.require_parse;
    opts.workers = common.workers;

    auto vocab = tokenizer::load_vocabulary(o.vocab, o.merges);
    auto docs = corpus::read_corpus(o.input);
    auto built = corpus::build_datasets(docs, vocab, modes, opts);

    ordered_json config = {{"input", o.input},
                           {"vocab", describe_file(o.vocab)},
                           {"merges", describe_file(o.merges)},
                           {"budget", o.budget},
                           {"sample_seed", o.sample_seed},
                           {"transform_seed", o.transform_seed},
                           {"modes", ordered_json::array()},
                           {"seq_len", o.sequence_length},
                           {"depth_bin", o.depth_bin.empty() ? ordered_json(nullptr) : ordered_json(o.depth_bin)},
                           {"bins", bins_json(opts.bins)},
                           {"require_parse", o.require_parse},
                           {"max_rows_per_shard", o.max_rows}};
    for (auto mode : modes) config["modes"].push_back(transforms::mode_name(mode));
    ordered_json input = describe_corpus(o.input, docs);

    auto finish = [&](const fs::path& dir, corpus::BuiltDataset& ds) {
        corpus::write_dataset(dir, ds, o.max_rows);
        auto m = manifest_header("pack");
        m["config"] = config;
        m["input"] = input;
        auto data_manifest = ds.manifest.to_json();
        for (auto& [k, v] : data_manifest.items()) m[k] = v;
        corpus::write_text_file(dir / corpus::kManifestName, dump_manifest(m));
        log_event("info", "pack.done",
                  {{"dir", dir.generic_string()}, {"documents", ds.manifest.documents_used},
                   {"sequences", ds.manifest.sequences_emitted}, {"dropped_tail", ds.manifest.dropped_tail}});
    };

    if (!o.ablation) {
        finish(o.output, built.front());
        return;
    }
    auto top = manifest_header("pack");
    top["config"] = config;
    top["input"] = input;
    top["datasets"] = ordered_json::array();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        std::string name(transforms::mode_name(modes[i]));
        finish(fs::path(o.output) / name, built[i]);
        top["datasets"].push_back({{"mode", name}, {"dir", name}, {"sequences", built[i].manifest.sequences_emitted}});
    }
    corpus::write_text_file(fs::path(o.output) / corpus::kManifestName, dump_manifest(top));
}

// ---------------------------------------------------------------------------
// eval

struct EvalCliOptions {
    std::string task, data, shots_file, backend, task_name, output;
    std::size_t shots = eval::kDefaultShots;
    std::uint64_t seed = 0;
    int max_new_tokens = eval::kDefaultMaxNewTokens;
    int timeout = 60;
};

int cmd_eval(EvalCliOptions o, const CommonOptions& common) {
    if (o.backend.empty()) {
        if (const char* env = std::getenv("BACKEND_URL")) o.backend = env;
    }
    if (o.backend.empty()) throw UsageError("no backend: pass --backend or set BACKEND_URL");
    if (o.max_new_tokens <= 0) throw UsageError("--max-new-tokens must be positive");
    std::string auth;
    if (const char* env = std::getenv("BACKEND_AUTH")) auth = env;

    std::unique_ptr<eval::Backend> backend;
    try {
        if (o.backend.rfind("http", 0) == 0)
            backend = eval::make_http_backend(o.backend, auth, o.timeout);
        else
            backend = eval::make_backend(o.backend, o.seed, auth);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    eval::EvalOptions opts{o.task_name, o.shots, o.seed, o.max_new_tokens, common.workers};
    eval::EvalReport report;
    if (o.task == "fld") {
        auto items = eval::load_fld(o.data);
        auto pool = eval::load_fld(o.shots_file);
        if (opts.task_name.empty() && !items.empty())
            opts.task_name = fmt::format("fld_{}", eval::variant_name(items.front().variant));
        report = eval::run_eval(*backend, items, pool, opts);
    } else {
        auto items = eval::load_babi(o.data);
        auto pool = eval::load_babi(o.shots_file);
        if (opts.task_name.empty()) opts.task_name = "babi";
        report = eval::run_eval(*backend, items, pool, opts);
    }

    fs::path out(o.output);
    corpus::write_text_file(out / "report.json", report.to_json().dump(2) + "\n");
    std::string table = eval::format_table({report});
    corpus::write_text_file(out / "report.txt", table);

    auto m = manifest_header("eval");
    // Credentials are never persisted; only whether they were supplied.
    m["config"] = {{"task", o.task},
                   {"task_name", opts.task_name},
                   {"data", describe_file(o.data)},
                   {"shots_file", describe_file(o.shots_file)},
                   {"shots", o.shots},
                   {"seed", o.seed},
                   {"backend", backend->name()},
                   {"auth_supplied", !auth.empty()},
                   {"max_new_tokens", o.max_new_tokens},
                   {"temperature", 0.0}};
    m["outputs"] = {"report.json", "report.txt"};
    corpus::write_text_file(out / corpus::kManifestName, dump_manifest(m));
    if (!g_quiet) fmt::print("{}", table);

    log_event(report.degraded ? "warn" : "info", "eval.done",
              {{"task", report.task}, {"n", report.n}, {"accuracy", report.accuracy},
               {"standard_error", report.standard_error}, {"backend_errors", report.backend_errors}});
    if (report.backend_errors == report.n) {
        log_event("error", "eval.backend_unreachable", {{"backend", backend->name()}});
        return kBackendError;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
    std::vector<std::string> inputs;
    std::string output;
    bool compare = false;
};

void cmd_report(const ReportOptions& o) {
    std::vector<eval::EvalReport> reports;
    ordered_json inputs = ordered_json::array();
    for (const auto& path : o.inputs) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(corpus::read_text_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw corpus::DataError(fmt::format("{}: {}", path, e.what()));
        }
        reports.push_back(eval::EvalReport::from_json(j));
        inputs.push_back(describe_file(path));
    }
    std::string table = eval::format_table(reports);
    fs::path out(o.output);
    corpus::write_text_file(out / "table.txt", table);
    auto m = manifest_header("report");
    m["config"] = {{"inputs", inputs}, {"compare", o.compare}};
    m["outputs"] = {"table.txt"};
    if (!g_quiet) fmt::print("{}", table);

    if (o.compare) {
        if (reports.size() != 2) throw UsageError("--compare needs exactly two reports");
        eval::ReportDelta d;
        try {
            d = eval::compare_reports(reports[0], reports[1]);
        } catch (const std::invalid_argument& e) {
            throw corpus::DataError(e.what());
        }
        corpus::write_text_file(out / "comparison.json", d.to_json().dump(2) + "\n");
        m["outputs"].push_back("comparison.json");
        if (!g_quiet) fmt::print("delta {:+.4f} (pooled se {:.4f}, n {})\n", d.delta, d.pooled_se, d.n);
    }
    corpus::write_text_file(out / corpus::kManifestName, dump_manifest(m));
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Python code corpus tooling: depth profiling, transforms, packing and few-shot evaluation",
                 "codecorpus"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    app.allow_config_extras(CLI::config_extras_mode::error);  // typos in config files are usage errors
    app.config_formatter(std::make_shared<JsonOrTomlConfig>());
    app.set_config("--config", "", "TOML or JSON config file; flags override it");
    app.set_version_flag("--version", std::string(kVersion));

    CommonOptions common;
    g_quiet = false;
    app.add_option("--workers", common.workers, "Worker threads; outputs do not depend on it")
        ->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g_quiet, "Only log warnings and errors; no tables on stdout");

    auto add_bins = [](CLI::App* sub, std::vector<std::size_t>& bins) {
        sub->add_option("--bins", bins, "Upper depths of the shallow, middle and deep bins")
            ->delimiter(',')
            ->expected(3)
            ->capture_default_str();
    };

    ProfileOptions prof;
    auto* profile = app.add_subcommand("profile", "Histogram of syntax-tree depths");
    profile->add_option("--input", prof.input, "Corpus directory or .jsonl")->required();
    profile->add_option("--output", prof.output, "Output directory")->required();
    profile->add_flag("--histogram", prof.histogram, "Print the histogram");
    add_bins(profile, prof.bins);

    StratifyOptions strat;
    auto* stratify = app.add_subcommand("stratify", "Split a corpus into shallow, middle and deep subsets");
    stratify->add_option("--input", strat.input, "Corpus directory or .jsonl")->required();
    stratify->add_option("--output", strat.output, "Output directory")->required();
    add_bins(stratify, strat.bins);

    TransformOptions tr;
    auto* transform = app.add_subcommand("transform", "Rewrite every document (raw, cf, cf_s, cf_r)");
    transform->add_option("--input", tr.input, "Corpus directory or .jsonl")->required();
    transform->add_option("--output", tr.output, "Output directory")->required();
    transform->add_option("--mode", tr.mode, "raw, cf, cf_s or cf_r")->capture_default_str();
    transform->add_option("--seed", tr.seed, "Base seed for cf_s and cf_r")->capture_default_str();

    PackOptions pk;
    auto* pack = app.add_subcommand("pack", "Sample, tokenize and pack fixed-length training rows");
    pack->add_option("--input", pk.input, "Corpus directory or .jsonl")->required();
    pack->add_option("--output", pk.output, "Output directory")->required();
    pack->add_option("--vocab", pk.vocab, "vocab.json")->required();
    pack->add_option("--merges", pk.merges, "merges.txt")->required();
    pack->add_option("--budget", pk.budget, "Token budget of the sample")->capture_default_str();
    pack->add_option("--sample-seed", pk.sample_seed, "Seed of the document order")->capture_default_str();
    pack->add_option("--mode", pk.mode, "raw, cf, cf_s or cf_r")->capture_default_str();
    pack->add_option("--transform-seed", pk.transform_seed, "Base seed for cf_s and cf_r")->capture_default_str();
    pack->add_option("--seq-len", pk.sequence_length, "Row length in tokens")->capture_default_str();
    pack->add_option("--depth-bin", pk.depth_bin, "Keep only shallow, middle or deep documents");
    pack->add_option("--max-rows-per-shard", pk.max_rows, "Rows per shard file")->capture_default_str();
    pack->add_flag("--ablation", pk.ablation, "Write raw, cf, cf_s and cf_r datasets from one sample");
    pack->add_flag("--require-parse", pk.require_parse, "Drop unparseable documents even in raw mode");
    add_bins(pack, pk.bins);

    EvalCliOptions ev;
    auto* evaluate = app.add_subcommand("eval", "Few-shot evaluation against a completion backend");
    evaluate->add_option("--task", ev.task, "fld or babi")->required()->check(CLI::IsMember({"fld", "babi"}));
    evaluate->add_option("--data", ev.data, "Evaluation items (.jsonl)")->required();
    evaluate->add_option("--shots-file", ev.shots_file, "Held-out exemplars (.jsonl)")->required();
    evaluate->add_option("--shots", ev.shots, "Exemplars per prompt")->capture_default_str();
    evaluate->add_option("--seed", ev.seed, "Seed of shot selection and mock draws")->capture_default_str();
    evaluate->add_option("--backend", ev.backend,
                         "http(s) URL, mock:uniform, mock:constant:TEXT or mock:echo-gold (default: $BACKEND_URL)");
    evaluate->add_option("--task-name", ev.task_name, "Name used in the report");
    evaluate->add_option("--max-new-tokens", ev.max_new_tokens, "Completion length")->capture_default_str();
    evaluate->add_option("--timeout", ev.timeout, "HTTP timeout in seconds")->capture_default_str();
    evaluate->add_option("--output", ev.output, "Output directory")->required();

    ReportOptions rp;
    auto* report = app.add_subcommand("report", "Tabulate and compare eval reports");
    report->add_option("--inputs", rp.inputs, "report.json files")->required();
    report->add_option("--output", rp.output, "Output directory")->required();
    report->add_flag("--compare", rp.compare, "Difference of two reports with its pooled standard error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*profile) cmd_profile(prof, common);
        else if (*stratify) cmd_stratify(strat, common);
        else if (*transform) cmd_transform(tr, common);
        else if (*pack) cmd_pack(pk, common);
        else if (*evaluate) return cmd_eval(ev, common);
        else if (*report) cmd_report(rp);
        return kOk;
    } catch (const UsageError& e) {
        log_event("error", "usage", {{"message", e.what()}});
        return kUsageError;
    } catch (const eval::BackendError& e) {
        log_event("error", "backend", {{"message", e.what()}});
        return kBackendError;
    } catch (const std::invalid_argument& e) {
        log_event("error", "usage", {{"message", e.what()}});
        return kUsageError;
    } catch (const std::exception& e) {
        // Data, vocabulary and I/O problems.
        log_event("error", "data", {{"message", e.what()}});
        return kDataError;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace codecorpus::cli
