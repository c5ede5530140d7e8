#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecomlm/lm.hpp"
#include "ecomlm/taskgen.hpp"

namespace ecomlm::eval {

using taskgen::TaskInstance;
using taskgen::TaskKind;

// Shot counts per task. Defaults follow the tuned per-task setup:
// AP 5, AP_MC 1, PP_MC 0, MCA 20, MCA_MC 5.
struct FewShotPolicy {
    std::map<TaskKind, int> shots;
    uint64_t seed = 0;

    static FewShotPolicy defaults();
    int shots_for(TaskKind k) const;
};

// A solved example as it appears in a few-shot prefix: the gold candidate
// text for choice tasks, prompt + " " + gold answer(s) for generation tasks.
std::string render_solved(const TaskInstance& inst);

// Joined gold answers ("A" or "A, B" for multi-value golds).
std::string gold_answer_text(const TaskInstance& inst);

// Few-shot prefix for `inst`: `shots` solved same-kind same-language examples
// drawn seed-deterministically from `pool` (never `inst` itself), joined with
// blank lines and followed by a trailing blank line. Empty at 0 shots.
// Throws ConfigError when the pool cannot supply the shots.
std::string few_shot_prefix(const TaskInstance& inst, const FewShotPolicy& policy,
                            const std::vector<TaskInstance>& pool);

// Prefix + test prompt for generation tasks; prefix + each candidate for
// choice tasks.
std::string build_generation_prompt(const TaskInstance& inst, const FewShotPolicy& policy,
                                    const std::vector<TaskInstance>& pool);
std::vector<std::string> build_choice_prompts(const TaskInstance& inst,
                                              const FewShotPolicy& policy,
                                              const std::vector<TaskInstance>& pool);

struct InstanceRecord {
    std::string task;
    std::string language;
    uint64_t ordinal = 0;
    int shots = 0;
    int chosen = -1;          // choice tasks
    int gold_index = -1;      // choice tasks
    std::string generated;    // generation tasks
    std::string gold_text;    // generation tasks
    bool correct = false;
    bool tie = false;         // argmax tie, broken toward the lowest index
    std::string error;
};

struct EvalOptions {
    int concurrency = 1;
    bool skip_errors = false;    // exclude failed instances from denominators
    bool per_token_norm = false; // argmax over mean instead of total logprob
    long gen_max_tokens = 128;
};

// trim + casefold + collapse internal whitespace + strip trailing punctuation
std::string normalize_answer(const std::string& s);

InstanceRecord eval_choice(const TaskInstance& inst, const lm::LmBackend& backend,
                           const FewShotPolicy& policy, const std::vector<TaskInstance>& pool,
                           const EvalOptions& opts = {});
InstanceRecord eval_generation(const TaskInstance& inst, const lm::LmBackend& backend,
                               const FewShotPolicy& policy, const std::vector<TaskInstance>& pool,
                               const EvalOptions& opts = {});

struct GroupStats {
    int shots = 0;
    size_t count = 0;   // scored instances (errors excluded under skip_errors)
    size_t correct = 0;
    size_t errors = 0;
    double accuracy = 0.0; // correct / count
};

struct EvalReport {
    std::map<std::pair<std::string, std::string>, GroupStats> groups; // (task, language)
    std::vector<InstanceRecord> records; // sorted by (task, language, ordinal)
    nlohmann::json meta;

    // Mean accuracy over non-English groups, per task and overall.
    std::map<std::string, double> non_english_avg_by_task() const;
    std::optional<double> non_english_avg() const;

    nlohmann::json to_json() const;
    std::string to_csv() const; // task,language,shots,count,accuracy
};

// Evaluates every instance (examples drawn from `pool`), aggregates per
// (task, language). The report is identical at any concurrency level for
// deterministic backends. Throws on the first failed instance unless
// opts.skip_errors; throws always when every instance failed.
EvalReport run_eval(const std::vector<TaskInstance>& instances, const lm::LmBackend& backend,
                    const FewShotPolicy& policy, const std::vector<TaskInstance>& pool,
                    const EvalOptions& opts = {});

// ---- perplexity ----

struct PplRow {
    long length = 0;          // bucket: texts truncated to this many tokens
    long tokens = 0;          // N_L
    double mean_nll = 0.0;
    std::optional<double> ppl;
    std::string note;         // diagnostic when the bucket is empty
};

struct PplReport {
    std::vector<PplRow> rows;
    std::vector<std::string> trend; // "rising"/"flat"/"falling" per gap
    std::string policy;
    std::string to_csv() const; // length,tokens,ppl
};

// Corpus perplexity: exp of the token-weighted mean NLL over all texts.
// stride > 0 scores each text in segments of at most `stride` continuation
// tokens (conditioning on the full preceding text, or on a window bounded by
// the backend's max_context_tokens when set). Segment boundaries come from a
// whole-text discovery pass, so the backend must accept each full text once.
double perplexity(const std::vector<std::string>& texts, const lm::LmBackend& backend,
                  long stride = 0);

// Perplexity as a function of input length: texts reaching at least L tokens
// are truncated to exactly L and pooled per bucket.
PplReport ppl_vs_length(const std::vector<std::string>& texts, const lm::LmBackend& backend,
                        const std::vector<long>& lengths);

} // namespace ecomlm::eval
