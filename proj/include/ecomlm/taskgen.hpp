#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecomlm/catalog.hpp"
#include "ecomlm/money.hpp"

namespace ecomlm::taskgen {

enum class TaskKind { AP, AP_MC, PP_MC, MCA, MCA_MC };

const char* kind_name(TaskKind k);                    // "ap", "ap_mc", ...
std::optional<TaskKind> kind_from_name(const std::string& name);
const std::vector<TaskKind>& all_kinds();
bool is_choice_task(TaskKind k);

// How a distractor candidate was derived from the source listing.
struct CorruptionNote {
    std::string key;         // corrupted aspect key, or "price"
    std::string original;
    std::string replacement; // replacement value or scaled amount
    std::string factor;      // PP_MC only: the applied price factor
};

struct Provenance {
    std::vector<std::string> listing_ids;
    std::vector<CorruptionNote> corruptions;
    uint64_t seed = 0;
    uint64_t ordinal = 0;
};

struct TaskInstance {
    TaskKind kind = TaskKind::AP;
    std::string language;
    std::string prompt;                // generation tasks
    std::vector<std::string> choices;  // choice tasks: 4 candidates, post-shuffle
    int gold_index = -1;               // choice tasks
    std::vector<std::string> gold;     // generation tasks: expected answer(s)
    Provenance provenance;
};

struct GeneratorConfig {
    uint64_t seed = 0;
    std::vector<Rational> price_factors = {{1, 10}, {1, 4}, {2, 1}};
    int corruption_min_aspects = 1;
    int mca_top_k = 1;

    void validate() const; // throws ConfigError on a bad factor set
};

// One skipped ordinal.
struct GenDiagnostic {
    uint64_t ordinal;
    std::string message;
};

struct GenResult {
    std::vector<TaskInstance> instances;
    std::vector<GenDiagnostic> diagnostics;
    std::string shortage; // non-empty when fewer than `count` were produced
};

// Prompt/candidate renderers. Placeholder filling only; every byte outside
// the placeholders is fixed.
std::string render_ap_prompt(const std::string& category, const std::string& title,
                             const std::string& key);
std::string render_ap_mc_candidate(const std::string& title,
                                   const std::vector<catalog::Aspect>& aspects);
std::string render_pp_mc_candidate(const std::string& title, const Money& price);
std::string render_mca_prompt(const std::string& category, const std::string& key);
std::string render_mca_mc_candidate(const std::string& category, const std::string& key,
                                    const std::string& value);

GenResult gen_ap(const catalog::Catalog& cat, const catalog::AspectStats& stats,
                 const GeneratorConfig& cfg, const std::string& language, size_t count);
GenResult gen_ap_mc(const catalog::Catalog& cat, const catalog::AspectStats& stats,
                    const GeneratorConfig& cfg, const std::string& language, size_t count);
GenResult gen_pp_mc(const catalog::Catalog& cat, const GeneratorConfig& cfg,
                    const std::string& language, size_t count);
GenResult gen_mca(const catalog::AspectStats& stats, const GeneratorConfig& cfg,
                  const std::string& language, size_t count);
GenResult gen_mca_mc(const catalog::AspectStats& stats, const GeneratorConfig& cfg,
                     const std::string& language, size_t count);

GenResult generate(TaskKind kind, const catalog::Catalog& cat,
                   const catalog::AspectStats& stats, const GeneratorConfig& cfg,
                   const std::string& language, size_t count);

// RNG stream ids, one per task kind; part of the reproducibility contract.
uint64_t rng_stream(TaskKind k);

} // namespace ecomlm::taskgen
