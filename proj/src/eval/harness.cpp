// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/eval/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "codecorpus/common/hash.hpp"
#include "codecorpus/common/parallel.hpp"
#include "codecorpus/common/rng.hpp"
#include "codecorpus/common/unicode.hpp"

namespace codecorpus::eval {

namespace {

constexpr std::array<std::string_view, 3> kFldLabels = {"PROVED", "DISPROVED", "UNKNOWN"};

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError(fmt::format("cannot read {}", path.string()));
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw DatasetError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
        if (!out.back().is_object()) throw DatasetError(fmt::format("{}:{}: expected an object", path.string(), line_no));
    }
    return out;
}

std::string string_field(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_string()) throw DatasetError(fmt::format("{}: missing string field '{}'", where, key));
    return j[key].get<std::string>();
}

std::string id_field(const nlohmann::json& j, const std::string& where) {
    if (j.contains("id") && j["id"].is_string()) return j["id"].get<std::string>();
    if (j.contains("id") && j["id"].is_number_integer()) return j["id"].dump();
    throw DatasetError(fmt::format("{}: missing 'id'", where));
}

bool is_space_at(std::string_view text, std::size_t pos, std::size_t& length) {
    auto d = unicode::decode(text, pos);
    length = d.length ? d.length : 1;
    return d.length && unicode::is_white_space(d.cp);
}

void check_unique_ids(const std::vector<std::string>& ids, const std::string& what) {
    std::set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second) throw DatasetError(fmt::format("{}: duplicate id '{}'", what, id));
}

}  // namespace

std::string_view variant_name(FldVariant v) { return v == FldVariant::Default ? "default" : "formulated"; }

FldVariant parse_variant(std::string_view name) {
    if (name == "default") return FldVariant::Default;
    if (name == "formulated") return FldVariant::Formulated;
    throw std::invalid_argument(fmt::format("unknown FLD variant '{}'", name));
}

std::vector<FldInstance> load_fld(const std::filesystem::path& path) {
    std::vector<FldInstance> out;
    std::vector<std::string> ids;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        std::string where = fmt::format("{} record {}", path.string(), ++line);
        FldInstance inst;
        inst.id = id_field(j, where);
        inst.hypothesis = string_field(j, "hypothesis", where);
        inst.gold = string_field(j, "gold", where);
        if (std::find(kFldLabels.begin(), kFldLabels.end(), inst.gold) == kFldLabels.end())
            throw DatasetError(fmt::format("{}: gold '{}' is not PROVED, DISPROVED or UNKNOWN", where, inst.gold));
        if (!j.contains("context")) throw DatasetError(fmt::format("{}: missing 'context'", where));
        if (j["context"].is_string()) {
            inst.context.push_back(j["context"].get<std::string>());
        } else if (j["context"].is_array()) {
            for (const auto& fact : j["context"]) {
                if (!fact.is_string()) throw DatasetError(fmt::format("{}: context facts must be strings", where));
                inst.context.push_back(fact.get<std::string>());
            }
        } else {
            throw DatasetError(fmt::format("{}: 'context' must be a list or a string", where));
        }
        if (inst.context.empty()) throw DatasetError(fmt::format("{}: empty context", where));
        if (j.contains("variant")) {
            try {
                inst.variant = parse_variant(string_field(j, "variant", where));
            } catch (const std::invalid_argument& e) {
                throw DatasetError(fmt::format("{}: {}", where, e.what()));
            }
        }
        ids.push_back(inst.id);
        out.push_back(std::move(inst));
    }
    check_unique_ids(ids, path.string());
    return out;
}

std::vector<BabiInstance> load_babi(const std::filesystem::path& path) {
    std::vector<BabiInstance> out;
    std::vector<std::string> ids;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        std::string where = fmt::format("{} record {}", path.string(), ++line);
        BabiInstance inst{id_field(j, where), string_field(j, "story", where), string_field(j, "question", where),
                          string_field(j, "gold", where)};
        if (inst.gold.empty() || inst.gold.find_first_of(" \t\r\n") != std::string::npos)
            throw DatasetError(fmt::format("{}: gold must be a single word", where));
        ids.push_back(inst.id);
        out.push_back(std::move(inst));
    }
    check_unique_ids(ids, path.string());
    return out;
}

namespace {

std::string fld_block(const FldInstance& inst) {
    std::string context;
    if (inst.context.size() == 1 && inst.context.front().rfind("sent1:", 0) == 0) {
        context = inst.context.front();  // preformatted
    } else {
        for (std::size_t i = 0; i < inst.context.size(); ++i)
            context += fmt::format("{}sent{}: {}", i ? " " : "", i + 1, inst.context[i]);
    }
    return fmt::format("{} $hypothesis$ = {} ; $context$ = {} ; $proof$ =", kFldInstruction, inst.hypothesis, context);
}

std::string babi_block(const BabiInstance& inst) {
    std::string_view story = inst.story;
    while (!story.empty() && (story.back() == '\n' || story.back() == ' ')) story.remove_suffix(1);
    return fmt::format("Passage: {}\nQuestion: {}\nAnswer:", story, inst.question);
}

}  // namespace

std::string render_fld_prompt(const FldInstance& query, const std::vector<FldInstance>& shots) {
    std::string out;
    for (const auto& shot : shots) {
        if (shot.variant != query.variant)
            throw std::invalid_argument(fmt::format("shot '{}' is {} but the query is {}", shot.id,
                                                    variant_name(shot.variant), variant_name(query.variant)));
        out += fld_block(shot) + " " + shot.gold + "\n\n";
    }
    return out + fld_block(query);
}

std::string render_babi_prompt(const BabiInstance& query, const std::vector<BabiInstance>& shots) {
    std::string out;
    for (const auto& shot : shots) out += babi_block(shot) + " " + shot.gold + "\n\n";
    return out + babi_block(query);
}

std::optional<std::string> extract_answer(std::string_view completion, Task task) {
    if (task == Task::Fld) {
        std::size_t best = std::string_view::npos;
        std::string_view label;
        for (auto candidate : kFldLabels) {
            std::size_t at = completion.find(candidate);
            if (at == std::string_view::npos) continue;
            if (at < best || (at == best && candidate.size() > label.size())) {
                best = at;
                label = candidate;
            }
        }
        if (best == std::string_view::npos) return std::nullopt;
        return std::string(label);
    }

    std::size_t pos = 0, len = 0;
    while (pos < completion.size() && is_space_at(completion, pos, len)) pos += len;
    std::size_t end = pos;
    while (end < completion.size() && !is_space_at(completion, end, len)) end += len;
    std::string_view word = completion.substr(pos, end - pos);
    while (!word.empty() && std::string_view(".,;:!?\"'").find(word.back()) != std::string_view::npos)
        word.remove_suffix(1);
    if (word.empty()) return std::nullopt;
    return std::string(word);
}

// ---------------------------------------------------------------------------

namespace {

class UniformBackend : public Backend {
public:
    explicit UniformBackend(std::uint64_t seed) : seed_(seed) {}
    std::string complete(const CompletionRequest& r) override {
        if (r.choices.empty()) return {};
        Rng rng(derive_seed(seed_, r.item_id));
        return " " + r.choices[rng.below(r.choices.size())];
    }
    std::string name() const override { return "mock:uniform"; }

private:
    std::uint64_t seed_;
};

class ConstantBackend : public Backend {
public:
    explicit ConstantBackend(std::string text) : text_(std::move(text)) {}
    std::string complete(const CompletionRequest&) override { return text_; }
    std::string name() const override { return "mock:constant:" + text_; }

private:
    std::string text_;
};

class EchoGoldBackend : public Backend {
public:
    std::string complete(const CompletionRequest& r) override { return " " + r.gold; }
    std::string name() const override { return "mock:echo-gold"; }
};

}  // namespace

std::unique_ptr<Backend> make_backend(const std::string& spec, std::uint64_t seed, const std::string& auth) {
    if (spec == "mock:uniform") return std::make_unique<UniformBackend>(derive_seed(seed, "mock:uniform"));
    if (spec == "mock:echo-gold") return std::make_unique<EchoGoldBackend>();
    if (spec.rfind("mock:constant:", 0) == 0) return std::make_unique<ConstantBackend>(spec.substr(14));
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) return make_http_backend(spec, auth);
    throw std::invalid_argument(fmt::format(
        "unknown backend '{}' (expected mock:uniform, mock:constant:TEXT, mock:echo-gold or an http(s) URL)", spec));
}

// ---------------------------------------------------------------------------

double standard_error(std::size_t correct, std::size_t n) {
    if (n == 0) return 0.0;
    double p = static_cast<double>(correct) / static_cast<double>(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::vector<std::size_t> select_shots(std::size_t pool_size, std::size_t k, std::uint64_t seed,
                                      std::string_view query_id) {
    if (k > pool_size)
        throw std::invalid_argument(fmt::format("{} shots requested from a pool of {}", k, pool_size));
    std::vector<std::size_t> pool(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) pool[i] = i;
    Rng rng(derive_seed(seed, std::string("shots:") + std::string(query_id)));
    // Partial Fisher-Yates: the first k slots are the sample.
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(pool_size - i)]);
    pool.resize(k);
    return pool;
}

namespace {

struct Query {
    std::string id;
    std::string prompt;
    std::string gold;
};

EvalReport run_queries(Backend& backend, const std::vector<Query>& queries, Task task,
                       const std::vector<std::string>& choices, const EvalOptions& options) {
    if (queries.empty()) throw std::invalid_argument("evaluation dataset is empty");
    EvalReport report;
    report.task = options.task_name;
    report.backend = backend.name();
    report.shots = options.shots;
    report.seed = options.seed;
    report.max_new_tokens = options.max_new_tokens;
    report.n = queries.size();
    report.records.resize(queries.size());

    // A run of consecutive failures means the backend is down; stop instead
    // of waiting out timeouts on every remaining item.
    std::atomic<std::size_t> streak{0};
    parallel_for(queries.size(), options.concurrency, [&](std::size_t i) {
        const Query& q = queries[i];
        ItemRecord& rec = report.records[i];
        rec.id = q.id;
        rec.gold = q.gold;
        rec.prompt_fnv1a64 = to_hex(fnv1a64(q.prompt));
        CompletionRequest request{q.prompt, options.max_new_tokens, 0.0, q.id, q.gold, choices};
        try {
            rec.completion = backend.complete(request);
        } catch (const BackendError& e) {
            rec.error = e.what();
            if (options.max_consecutive_failures && ++streak >= options.max_consecutive_failures)
                throw BackendError(fmt::format("giving up after {} consecutive failures: {}", streak.load(), e.what()));
            return;
        }
        streak = 0;
        rec.extracted = extract_answer(rec.completion, task);
        rec.correct = rec.extracted && *rec.extracted == q.gold;
    });

    for (const auto& rec : report.records) {
        report.correct += rec.correct ? 1 : 0;
        report.backend_errors += rec.error.empty() ? 0 : 1;
    }
    report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.n);
    report.standard_error = standard_error(report.correct, report.n);
    report.degraded = report.backend_errors > 0;
    return report;
}

template <typename Instance, typename Render>
std::vector<Query> build_queries(const std::vector<Instance>& items, const std::vector<Instance>& pool,
                                 const EvalOptions& options, Render render) {
    std::set<std::string> pool_ids;
    for (const auto& p : pool) pool_ids.insert(p.id);
    std::vector<Query> queries;
    queries.reserve(items.size());
    for (const auto& item : items) {
        if (pool_ids.count(item.id))
            throw std::invalid_argument(fmt::format("item '{}' is also in the shot pool", item.id));
        std::vector<Instance> shots;
        for (std::size_t s : select_shots(pool.size(), options.shots, options.seed, item.id)) shots.push_back(pool[s]);
        queries.push_back({item.id, render(item, shots), item.gold});
    }
    return queries;
}

}  // namespace

EvalReport run_eval(Backend& backend, const std::vector<FldInstance>& items, const std::vector<FldInstance>& shot_pool,
                    const EvalOptions& options) {
    auto queries = build_queries(items, shot_pool, options, render_fld_prompt);
    return run_queries(backend, queries, Task::Fld, {kFldLabels.begin(), kFldLabels.end()}, options);
}

EvalReport run_eval(Backend& backend, const std::vector<BabiInstance>& items,
                    const std::vector<BabiInstance>& shot_pool, const EvalOptions& options) {
    auto queries = build_queries(items, shot_pool, options, render_babi_prompt);
    std::set<std::string> answers;
    for (const auto& item : items) answers.insert(item.gold);
    return run_queries(backend, queries, Task::Babi, {answers.begin(), answers.end()}, options);
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["task"] = task;
    j["backend"] = backend;
    j["shots"] = shots;
    j["seed"] = seed;
    j["max_new_tokens"] = max_new_tokens;
    j["n"] = n;
    j["correct"] = correct;
    j["accuracy"] = accuracy;
    j["standard_error"] = standard_error;
    j["backend_errors"] = backend_errors;
    j["degraded"] = degraded;
    auto items = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json item;
        item["id"] = r.id;
        item["prompt_fnv1a64"] = r.prompt_fnv1a64;
        item["completion"] = r.completion;
        item["extracted"] = r.extracted ? nlohmann::ordered_json(*r.extracted) : nullptr;
        item["gold"] = r.gold;
        item["correct"] = r.correct;
        if (!r.error.empty()) item["error"] = r.error;
        items.push_back(std::move(item));
    }
    j["records"] = std::move(items);
    return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        r.task = j.at("task").get<std::string>();
        r.backend = j.value("backend", "");
        r.shots = j.value("shots", std::size_t{0});
        r.seed = j.value("seed", std::uint64_t{0});
        r.max_new_tokens = j.value("max_new_tokens", 0);
        r.n = j.at("n").get<std::size_t>();
        r.correct = j.at("correct").get<std::size_t>();
        r.accuracy = j.at("accuracy").get<double>();
        r.standard_error = j.at("standard_error").get<double>();
        r.backend_errors = j.value("backend_errors", std::size_t{0});
        r.degraded = j.value("degraded", false);
        for (const auto& item : j.value("records", nlohmann::json::array())) {
            ItemRecord rec;
            rec.id = item.at("id").get<std::string>();
            rec.prompt_fnv1a64 = item.value("prompt_fnv1a64", "");
            rec.completion = item.value("completion", "");
            if (item.contains("extracted") && item["extracted"].is_string())
                rec.extracted = item["extracted"].get<std::string>();
            rec.gold = item.at("gold").get<std::string>();
            rec.correct = item.value("correct", false);
            rec.error = item.value("error", "");
            r.records.push_back(std::move(rec));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(fmt::format("malformed report: {}", e.what()));
    }
}

nlohmann::ordered_json ReportDelta::to_json() const {
    return {{"task", task},           {"n", n},        {"accuracy_a", accuracy_a}, {"accuracy_b", accuracy_b},
            {"delta", delta},         {"pooled_se", pooled_se}};
}

ReportDelta compare_reports(const EvalReport& a, const EvalReport& b) {
    if (a.task != b.task) throw std::invalid_argument(fmt::format("task mismatch: '{}' vs '{}'", a.task, b.task));
    if (a.n != b.n) throw std::invalid_argument(fmt::format("item count mismatch: {} vs {}", a.n, b.n));
    if (a.n == 0) throw std::invalid_argument("reports have no items");
    ReportDelta d;
    d.task = a.task;
    d.n = a.n;
    d.accuracy_a = a.accuracy;
    d.accuracy_b = b.accuracy;
    d.delta = a.accuracy - b.accuracy;
    double n = static_cast<double>(a.n);
    double p = static_cast<double>(a.correct + b.correct) / (2.0 * n);
    d.pooled_se = std::sqrt(p * (1.0 - p) * (2.0 / n));
    return d;
}

std::string format_table(const std::vector<EvalReport>& reports) {
    std::size_t width = 4;
    for (const auto& r : reports) width = std::max(width, r.task.size());
    std::string out = fmt::format("{:<{}}  {:>6}  {}\n", "task", width, "n", "accuracy");
    for (const auto& r : reports) {
        out += fmt::format("{:<{}}  {:>6}  {:.2f}±{:.2f}{}\n", r.task, width, r.n, r.accuracy, r.standard_error,
                           r.degraded ? fmt::format("  (degraded: {} backend errors)", r.backend_errors) : "");
    }
    return out;
}

}  // namespace codecorpus::eval
