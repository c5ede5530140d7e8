#include "ecomlm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <thread>

#include "ecomlm/errors.hpp"
#include "ecomlm/rng.hpp"

namespace ecomlm::eval {

using nlohmann::json;
using taskgen::is_choice_task;
using taskgen::kind_name;

FewShotPolicy FewShotPolicy::defaults() {
    FewShotPolicy p;
    p.shots = {{TaskKind::AP, 5},
               {TaskKind::AP_MC, 1},
               {TaskKind::PP_MC, 0},
               {TaskKind::MCA, 20},
               {TaskKind::MCA_MC, 5}};
    return p;
}

int FewShotPolicy::shots_for(TaskKind k) const {
    const auto it = shots.find(k);
    return it == shots.end() ? 0 : it->second;
}

std::string gold_answer_text(const TaskInstance& inst) {
    std::string out;
    for (size_t i = 0; i < inst.gold.size(); ++i) {
        if (i) out += ", ";
        out += inst.gold[i];
    }
    return out;
}

std::string render_solved(const TaskInstance& inst) {
    if (is_choice_task(inst.kind)) {
        return inst.choices.at(static_cast<size_t>(inst.gold_index));
    }
    return inst.prompt + " " + gold_answer_text(inst);
}

namespace {

bool same_instance(const TaskInstance& a, const TaskInstance& b) {
    return a.kind == b.kind && a.language == b.language &&
           a.provenance.seed == b.provenance.seed &&
           a.provenance.ordinal == b.provenance.ordinal;
}

// Few-shot example draws live on their own RNG stream, keyed by the ordinal
// of the instance under test.
constexpr uint64_t kFewShotStreamBase = 100;

} // namespace

std::string few_shot_prefix(const TaskInstance& inst, const FewShotPolicy& policy,
                            const std::vector<TaskInstance>& pool) {
    const int shots = policy.shots_for(inst.kind);
    if (shots == 0) return "";

    std::vector<size_t> eligible;
    for (size_t i = 0; i < pool.size(); ++i) {
        const auto& cand = pool[i];
        if (cand.kind != inst.kind || cand.language != inst.language) continue;
        if (same_instance(cand, inst)) continue;
        eligible.push_back(i);
    }
    if (eligible.size() < static_cast<size_t>(shots)) {
        throw ConfigError("few-shot pool shortfall for " + std::string(kind_name(inst.kind)) +
                          "/" + inst.language + ": need " + std::to_string(shots) + ", have " +
                          std::to_string(eligible.size()));
    }

    CounterRng rng(policy.seed, kFewShotStreamBase + taskgen::rng_stream(inst.kind),
                   inst.provenance.ordinal);
    std::string prefix;
    for (const size_t pick : rng.sample_indices(eligible.size(), static_cast<size_t>(shots))) {
        prefix += render_solved(pool[eligible[pick]]);
        prefix += "\n\n";
    }
    return prefix;
}

std::string build_generation_prompt(const TaskInstance& inst, const FewShotPolicy& policy,
                                    const std::vector<TaskInstance>& pool) {
    return few_shot_prefix(inst, policy, pool) + inst.prompt;
}

std::vector<std::string> build_choice_prompts(const TaskInstance& inst,
                                              const FewShotPolicy& policy,
                                              const std::vector<TaskInstance>& pool) {
    const std::string prefix = few_shot_prefix(inst, policy, pool);
    std::vector<std::string> out;
    out.reserve(inst.choices.size());
    for (const auto& c : inst.choices) out.push_back(prefix + c);
    return out;
}

std::string normalize_answer(const std::string& s) {
    std::string collapsed;
    collapsed.reserve(s.size());
    bool in_space = true; // leading whitespace is dropped
    for (const char raw : s) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !collapsed.empty()) collapsed += ' ';
        in_space = false;
        collapsed += static_cast<char>(std::tolower(c));
    }
    while (!collapsed.empty()) {
        const char back = collapsed.back();
        if (back == '.' || back == ',' || back == ';' || back == ':' || back == '!' ||
            back == '?') {
            collapsed.pop_back();
        } else {
            break;
        }
    }
    return collapsed;
}

namespace {

InstanceRecord base_record(const TaskInstance& inst, const FewShotPolicy& policy) {
    InstanceRecord rec;
    rec.task = kind_name(inst.kind);
    rec.language = inst.language;
    rec.ordinal = inst.provenance.ordinal;
    rec.shots = policy.shots_for(inst.kind);
    return rec;
}

} // namespace

InstanceRecord eval_choice(const TaskInstance& inst, const lm::LmBackend& backend,
                           const FewShotPolicy& policy, const std::vector<TaskInstance>& pool,
                           const EvalOptions& opts) {
    if (!is_choice_task(inst.kind)) throw ConfigError("eval_choice: not a choice task");
    InstanceRecord rec = base_record(inst, policy);
    rec.gold_index = inst.gold_index;

    const std::string prefix = few_shot_prefix(inst, policy, pool);
    std::vector<double> scores;
    scores.reserve(inst.choices.size());
    for (const auto& candidate : inst.choices) {
        const auto result = backend.score({prefix, candidate, std::nullopt});
        scores.push_back(opts.per_token_norm && result.token_count > 0
                             ? result.total_logprob / static_cast<double>(result.token_count)
                             : result.total_logprob);
    }

    int chosen = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
        if (scores[i] > scores[chosen]) chosen = i; // ties keep the lowest index
    }
    int at_max = 0;
    for (const double s : scores) {
        if (s == scores[chosen]) ++at_max;
    }
    rec.chosen = chosen;
    rec.tie = at_max > 1;
    rec.correct = chosen == inst.gold_index;
    return rec;
}

InstanceRecord eval_generation(const TaskInstance& inst, const lm::LmBackend& backend,
                               const FewShotPolicy& policy, const std::vector<TaskInstance>& pool,
                               const EvalOptions& opts) {
    if (is_choice_task(inst.kind)) throw ConfigError("eval_generation: not a generation task");
    InstanceRecord rec = base_record(inst, policy);
    rec.gold_text = gold_answer_text(inst);

    const std::string prompt = build_generation_prompt(inst, policy, pool);
    rec.generated = backend.generate(prompt, opts.gen_max_tokens, {"\n"});
    rec.correct = normalize_answer(rec.generated) == normalize_answer(rec.gold_text);
    return rec;
}

EvalReport run_eval(const std::vector<TaskInstance>& instances, const lm::LmBackend& backend,
                    const FewShotPolicy& policy, const std::vector<TaskInstance>& pool,
                    const EvalOptions& opts) {
    if (instances.empty()) throw ConfigError("run_eval: no instances");

    const size_t n = instances.size();
    std::vector<InstanceRecord> records(n);
    std::atomic<size_t> cursor{0};

    const auto worker = [&] {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= n) return;
            const auto& inst = instances[i];
            try {
                records[i] = is_choice_task(inst.kind)
                                 ? eval_choice(inst, backend, policy, pool, opts)
                                 : eval_generation(inst, backend, policy, pool, opts);
            } catch (const std::exception& e) {
                records[i] = base_record(inst, policy);
                records[i].error = std::string(e.what()) + " [instance " +
                                   kind_name(inst.kind) + "/" + inst.language + "#" +
                                   std::to_string(inst.provenance.ordinal) + "]";
            }
        }
    };

    const int threads = std::max(1, std::min<int>(opts.concurrency, static_cast<int>(n)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> ts;
        ts.reserve(static_cast<size_t>(threads));
        for (int t = 0; t < threads; ++t) ts.emplace_back(worker);
        for (auto& t : ts) t.join();
    }

    size_t failed = 0;
    for (const auto& rec : records) {
        if (!rec.error.empty()) ++failed;
    }
    if (failed == n) throw DataError("every instance failed; first: " + records[0].error);
    if (failed > 0 && !opts.skip_errors) {
        for (const auto& rec : records) {
            if (!rec.error.empty()) throw DataError(rec.error);
        }
    }

    EvalReport report;
    std::stable_sort(records.begin(), records.end(),
                     [](const InstanceRecord& a, const InstanceRecord& b) {
                         return std::tie(a.task, a.language, a.ordinal) <
                                std::tie(b.task, b.language, b.ordinal);
                     });
    for (const auto& rec : records) {
        auto& g = report.groups[{rec.task, rec.language}];
        g.shots = rec.shots;
        if (!rec.error.empty()) {
            ++g.errors;
            continue;
        }
        ++g.count;
        if (rec.correct) ++g.correct;
    }
    for (auto& [key, g] : report.groups) {
        g.accuracy = g.count == 0 ? 0.0 : static_cast<double>(g.correct) / static_cast<double>(g.count);
    }
    report.records = std::move(records);
    report.meta = {{"backend", backend.descriptor().describe()},
                   {"policy_seed", policy.seed},
                   {"per_token_norm", opts.per_token_norm},
                   {"skip_errors", opts.skip_errors}};
    return report;
}

std::map<std::string, double> EvalReport::non_english_avg_by_task() const {
    std::map<std::string, std::pair<double, size_t>> acc;
    for (const auto& [key, g] : groups) {
        if (key.second == "en") continue;
        acc[key.first].first += g.accuracy;
        acc[key.first].second += 1;
    }
    std::map<std::string, double> out;
    for (const auto& [task, sum_n] : acc) {
        out[task] = sum_n.first / static_cast<double>(sum_n.second);
    }
    return out;
}

std::optional<double> EvalReport::non_english_avg() const {
    double sum = 0;
    size_t n = 0;
    for (const auto& [key, g] : groups) {
        if (key.second == "en") continue;
        sum += g.accuracy;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

json EvalReport::to_json() const {
    json j;
    j["meta"] = meta;
    json groups_json = json::array();
    for (const auto& [key, g] : groups) {
        groups_json.push_back({{"task", key.first},
                               {"language", key.second},
                               {"shots", g.shots},
                               {"count", g.count},
                               {"correct", g.correct},
                               {"errors", g.errors},
                               {"accuracy", g.accuracy}});
    }
    j["groups"] = std::move(groups_json);
    json recs = json::array();
    for (const auto& r : records) {
        json rec{{"task", r.task},       {"language", r.language}, {"ordinal", r.ordinal},
                 {"shots", r.shots},     {"correct", r.correct},   {"tie", r.tie}};
        if (r.chosen >= 0) {
            rec["chosen"] = r.chosen;
            rec["gold"] = r.gold_index;
        } else {
            rec["generated"] = r.generated;
            rec["gold"] = r.gold_text;
        }
        if (!r.error.empty()) rec["error"] = r.error;
        recs.push_back(std::move(rec));
    }
    j["records"] = std::move(recs);
    if (const auto avg = non_english_avg()) {
        j["non_en_avg"] = *avg;
        j["non_en_avg_by_task"] = non_english_avg_by_task();
    }
    return j;
}

std::string EvalReport::to_csv() const {
    std::string out = "task,language,shots,count,accuracy\n";
    char buf[128];
    for (const auto& [key, g] : groups) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%d,%zu,%.6f\n", key.first.c_str(),
                      key.second.c_str(), g.shots, g.count, g.accuracy);
        out += buf;
    }
    return out;
}

// ---- perplexity ----

namespace {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

std::string ppl_csv_row(long length, long tokens, const std::optional<double>& ppl) {
    char buf[128];
    if (ppl) {
        std::snprintf(buf, sizeof(buf), "%ld,%ld,%.8f\n", length, tokens, *ppl);
    } else {
        std::snprintf(buf, sizeof(buf), "%ld,%ld,\n", length, tokens);
    }
    return buf;
}

} // namespace

std::string PplReport::to_csv() const {
    std::string out = "length,tokens,ppl\n";
    for (const auto& r : rows) out += ppl_csv_row(r.length, r.tokens, r.ppl);
    return out;
}

double perplexity(const std::vector<std::string>& texts, const lm::LmBackend& backend,
                  long stride) {
    if (texts.empty()) throw ConfigError("perplexity: no texts");
    const auto window = backend.descriptor().max_context_tokens;

    KahanSum nll;
    long total_tokens = 0;
    for (const auto& text : texts) {
        if (text.empty()) continue;
        // discovery pass fixes the token boundaries for this text
        const auto full = backend.score({"", text, std::nullopt});
        if (stride <= 0 || full.token_count <= stride) {
            for (const auto& t : full.token_logprobs) nll.add(-t.logprob);
            total_tokens += full.token_count;
            continue;
        }

        std::vector<size_t> starts;
        starts.reserve(full.token_logprobs.size() + 1);
        size_t off = 0;
        for (const auto& t : full.token_logprobs) {
            starts.push_back(off);
            off += t.token.size();
        }
        starts.push_back(off);

        const long n = full.token_count;
        for (long seg = 0; seg < n; seg += stride) {
            const long end = std::min(n, seg + stride);
            long ctx_begin = 0;
            if (window && *window > end - seg) {
                ctx_begin = std::max<long>(0, seg - (*window - (end - seg)));
            }
            const std::string context =
                text.substr(starts[static_cast<size_t>(ctx_begin)],
                            starts[static_cast<size_t>(seg)] - starts[static_cast<size_t>(ctx_begin)]);
            const std::string chunk =
                text.substr(starts[static_cast<size_t>(seg)],
                            starts[static_cast<size_t>(end)] - starts[static_cast<size_t>(seg)]);
            const auto part = backend.score({context, chunk, std::nullopt});
            for (const auto& t : part.token_logprobs) nll.add(-t.logprob);
            total_tokens += part.token_count;
        }
    }
    if (total_tokens == 0) throw ConfigError("perplexity: no scoreable tokens");
    return std::exp(nll.sum / static_cast<double>(total_tokens));
}

PplReport ppl_vs_length(const std::vector<std::string>& texts, const lm::LmBackend& backend,
                        const std::vector<long>& lengths) {
    if (texts.empty()) throw ConfigError("ppl_vs_length: no texts");
    for (size_t i = 1; i < lengths.size(); ++i) {
        if (lengths[i] <= lengths[i - 1]) {
            throw ConfigError("ppl_vs_length: lengths must be strictly increasing");
        }
    }
    if (lengths.empty() || lengths.front() < 1) {
        throw ConfigError("ppl_vs_length: lengths must be >= 1");
    }

    std::vector<lm::ScoreResult> scored;
    scored.reserve(texts.size());
    for (const auto& text : texts) {
        if (text.empty()) continue;
        scored.push_back(backend.score({"", text, std::nullopt}));
    }

    PplReport report;
    report.policy = "truncate-to-length; one full-text scoring pass per text";
    for (const long L : lengths) {
        PplRow row;
        row.length = L;
        KahanSum nll;
        for (const auto& s : scored) {
            if (s.token_count < L) continue;
            for (long i = 0; i < L; ++i) {
                nll.add(-s.token_logprobs[static_cast<size_t>(i)].logprob);
            }
            row.tokens += L;
        }
        if (row.tokens == 0) {
            row.note = "no text reaches " + std::to_string(L) + " tokens";
        } else {
            row.mean_nll = nll.sum / static_cast<double>(row.tokens);
            row.ppl = std::exp(row.mean_nll);
        }
        report.rows.push_back(std::move(row));
    }

    for (size_t i = 1; i < report.rows.size(); ++i) {
        const auto& a = report.rows[i - 1].ppl;
        const auto& b = report.rows[i].ppl;
        if (!a || !b) {
            report.trend.push_back("n/a");
        } else if (*b > *a * (1 + 1e-9)) {
            report.trend.push_back("rising");
        } else if (*b < *a * (1 - 1e-9)) {
            report.trend.push_back("falling");
        } else {
            report.trend.push_back("flat");
        }
    }
    return report;
}

} // namespace ecomlm::eval
