// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace codecorpus::eval {

inline constexpr std::string_view kFldInstruction =
    "Based on the provided facts ($context$), either prove or disprove the hypothesis or state that it is unknown.";
inline constexpr std::size_t kDefaultShots = 3;
inline constexpr int kDefaultMaxNewTokens = 16;

enum class FldVariant { Default, Formulated };
std::string_view variant_name(FldVariant v);
FldVariant parse_variant(std::string_view name);

struct FldInstance {
    std::string id;
    std::string hypothesis;
    // Facts in order; rendered as "sent1: ... sent2: ...".
    std::vector<std::string> context;
    std::string gold;  // PROVED, DISPROVED or UNKNOWN
    FldVariant variant = FldVariant::Default;
};

struct BabiInstance {
    std::string id;
    std::string story;
    std::string question;
    std::string gold;  // one word
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// JSONL loaders; one instance per line. `context` may be a list of facts or
// a preformatted "sent1: ... sent2: ..." string.
std::vector<FldInstance> load_fld(const std::filesystem::path& path);
std::vector<BabiInstance> load_babi(const std::filesystem::path& path);

/// One FLD block: the instruction, then "$hypothesis$ = H ; $context$ =
/// sent1: F1 sent2: F2 ; $proof$ =" on one line. Solved exemplars append
/// " LABEL" and blocks are separated by a blank line. Throws
/// std::invalid_argument when a shot's variant differs from the query's.
std::string render_fld_prompt(const FldInstance& query, const std::vector<FldInstance>& shots);

/// "Passage: S\nQuestion: Q\nAnswer:" blocks, exemplars followed by " A".
std::string render_babi_prompt(const BabiInstance& query, const std::vector<BabiInstance>& shots);

enum class Task { Fld, Babi };

/// FLD: the earliest of PROVED / DISPROVED / UNKNOWN in the text
/// (case-sensitive; "DISPROVED" wins over the "PROVED" inside it). bAbi:
/// the first whitespace-delimited word, minus trailing sentence punctuation.
/// nullopt is NoAnswer. Total on arbitrary bytes.
std::optional<std::string> extract_answer(std::string_view completion, Task task);

// ---------------------------------------------------------------------------
// Backends

struct CompletionRequest {
    std::string prompt;
    int max_tokens = kDefaultMaxNewTokens;
    double temperature = 0.0;
    // Visible only to the built-in mock backends; never sent over HTTP.
    std::string item_id;
    std::string gold;
    std::vector<std::string> choices;
};

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Backend {
public:
    virtual ~Backend() = default;
    // Must be callable from several threads at once.
    virtual std::string complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

/// "mock:uniform", "mock:constant:TEXT", "mock:echo-gold", or an http(s)
/// URL. The uniform mock draws from request.choices with a stream derived
/// from (seed, item id). Throws std::invalid_argument on an unknown spec.
std::unique_ptr<Backend> make_backend(const std::string& spec, std::uint64_t seed, const std::string& auth = {});

/// POSTs {"prompt", "max_tokens", "temperature"} and reads {"text"}.
/// `auth`, when set, is sent verbatim as the Authorization header.
std::unique_ptr<Backend> make_http_backend(const std::string& url, const std::string& auth, int timeout_seconds = 60);

// ---------------------------------------------------------------------------
// Runs and reports

struct EvalOptions {
    std::string task_name;
    std::size_t shots = kDefaultShots;
    std::uint64_t seed = 0;
    int max_new_tokens = kDefaultMaxNewTokens;
    unsigned concurrency = 1;
    // run_eval throws BackendError after this many failures in a row; 0
    // disables the check. Isolated failures are recorded per item instead.
    std::size_t max_consecutive_failures = 8;
};

struct ItemRecord {
    std::string id;
    std::string prompt_fnv1a64;
    std::string completion;
    std::optional<std::string> extracted;
    std::string gold;
    bool correct = false;
    std::string error;  // backend failure, counted as NoAnswer
};

struct EvalReport {
    std::string task;
    std::string backend;
    std::size_t shots = 0;
    std::uint64_t seed = 0;
    int max_new_tokens = 0;
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    double standard_error = 0.0;
    std::size_t backend_errors = 0;
    bool degraded = false;
    std::vector<ItemRecord> records;

    nlohmann::ordered_json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

/// sqrt(p (1 - p) / n); 0 when n is 0.
double standard_error(std::size_t correct, std::size_t n);

/// Shots for one query: `k` distinct exemplars from the held-out pool,
/// chosen by a stream derived from (seed, query id). Throws
/// std::invalid_argument when the pool is smaller than k.
std::vector<std::size_t> select_shots(std::size_t pool_size, std::size_t k, std::uint64_t seed,
                                      std::string_view query_id);

EvalReport run_eval(Backend& backend, const std::vector<FldInstance>& items, const std::vector<FldInstance>& shot_pool,
                    const EvalOptions& options);
EvalReport run_eval(Backend& backend, const std::vector<BabiInstance>& items,
                    const std::vector<BabiInstance>& shot_pool, const EvalOptions& options);

struct ReportDelta {
    std::string task;
    std::size_t n = 0;
    double accuracy_a = 0.0;
    double accuracy_b = 0.0;
    double delta = 0.0;      // a - b
    double pooled_se = 0.0;  // sqrt(p (1 - p) (2 / n)), p = pooled accuracy

    nlohmann::ordered_json to_json() const;
};

/// Throws std::invalid_argument when task or n differ.
ReportDelta compare_reports(const EvalReport& a, const EvalReport& b);

/// Plain-text table, one row per report: "task  n  accuracy ± se".
std::string format_table(const std::vector<EvalReport>& reports);

}  // namespace codecorpus::eval
