#include "ecomlm/taskgen.hpp"

#include <algorithm>
#include <set>

#include "ecomlm/errors.hpp"
#include "ecomlm/rng.hpp"

namespace ecomlm::taskgen {

const char* kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::AP: return "ap";
        case TaskKind::AP_MC: return "ap_mc";
        case TaskKind::PP_MC: return "pp_mc";
        case TaskKind::MCA: return "mca";
        case TaskKind::MCA_MC: return "mca_mc";
    }
    return "?";
}

std::optional<TaskKind> kind_from_name(const std::string& name) {
    for (const TaskKind k : all_kinds()) {
        if (name == kind_name(k)) return k;
    }
    return std::nullopt;
}

const std::vector<TaskKind>& all_kinds() {
    static const std::vector<TaskKind> kinds = {TaskKind::AP, TaskKind::AP_MC, TaskKind::PP_MC,
                                                TaskKind::MCA, TaskKind::MCA_MC};
    return kinds;
}

bool is_choice_task(TaskKind k) {
    return k == TaskKind::AP_MC || k == TaskKind::PP_MC || k == TaskKind::MCA_MC;
}

uint64_t rng_stream(TaskKind k) {
    return 1 + static_cast<uint64_t>(k);
}

void GeneratorConfig::validate() const {
    if (price_factors.size() != 3) {
        throw ConfigError("price_factors must contain exactly 3 factors");
    }
    for (size_t i = 0; i < price_factors.size(); ++i) {
        const auto& f = price_factors[i];
        if (f.num <= 0 || f.den <= 0) throw ConfigError("price factors must be positive");
        if (f.num == f.den) throw ConfigError("price factor 1 would collide with the true price");
        for (size_t j = i + 1; j < price_factors.size(); ++j) {
            if (f == price_factors[j]) throw ConfigError("price factors must be pairwise distinct");
        }
    }
    if (corruption_min_aspects < 1) throw ConfigError("corruption_min_aspects must be >= 1");
    if (mca_top_k < 1) throw ConfigError("mca_top_k must be >= 1");
}

std::string render_ap_prompt(const std::string& category, const std::string& title,
                             const std::string& key) {
    return "For an e-commerce website, under the category \"" + category +
           "\", the listing with the title \"" + title +
           "\" has the following aspect key-value pairs:\n" + key + ":";
}

std::string render_ap_mc_candidate(const std::string& title,
                                   const std::vector<catalog::Aspect>& aspects) {
    std::string out = "For an e-commerce website, the listing with the title \"" + title +
                      "\" has the following aspect key-value pairs associated with it:";
    for (const auto& a : aspects) {
        out += '\n';
        out += a.key;
        out += ": ";
        out += a.value;
    }
    return out;
}

std::string render_pp_mc_candidate(const std::string& title, const Money& price) {
    return "For the listing with the title \"" + title + "\", the final selling price was " +
           price.symbol() + price.amount_str() + ".";
}

std::string render_mca_prompt(const std::string& category, const std::string& key) {
    return "For an e-commerce website, under the category \"" + category +
           "\", the following are the most common aspect values for the aspect key \"" + key +
           "\":";
}

std::string render_mca_mc_candidate(const std::string& category, const std::string& key,
                                    const std::string& value) {
    return "For an e-commerce website, under the category \"" + category +
           "\", the most common aspect value for the aspect key \"" + key + "\" is \"" + value +
           "\".";
}

namespace {

using catalog::AspectStats;
using catalog::Catalog;
using catalog::Listing;
using catalog::StatsKey;
using catalog::ValueCount;

// Shuffles gold + 3 distractors and records the post-shuffle gold position.
void place_candidates(CounterRng& rng, std::string gold_text,
                      std::vector<std::string> distractors, TaskInstance& inst) {
    std::vector<int> order = {0, 1, 2, 3};
    rng.shuffle(order);
    inst.choices.resize(4);
    for (int pos = 0; pos < 4; ++pos) {
        const int src = order[pos];
        if (src == 0) {
            inst.choices[pos] = std::move(gold_text);
            inst.gold_index = pos;
        } else {
            inst.choices[pos] = std::move(distractors[src - 1]);
        }
    }
}

std::vector<const Listing*> eligible_listings(const Catalog& cat, const std::string& lang,
                                              bool need_aspects, bool need_price) {
    std::vector<const Listing*> out;
    for (const auto& l : cat.listings) {
        if (l.language != lang) continue;
        if (need_aspects && l.aspects.empty()) continue;
        if (need_price && !l.price) continue;
        out.push_back(&l);
    }
    return out;
}

GenResult shortage_result(const std::string& what, const std::string& lang) {
    GenResult r;
    r.shortage = "no eligible " + what + " for language \"" + lang + "\"";
    return r;
}

void finish(GenResult& r, size_t count, const std::string& what) {
    if (r.instances.size() < count && r.shortage.empty()) {
        r.shortage = "produced " + std::to_string(r.instances.size()) + " of " +
                     std::to_string(count) + " requested " + what + " instances (" +
                     std::to_string(r.diagnostics.size()) + " skipped)";
    }
}

// Observed values for (lang, category, key) excluding `original`, in stats
// order (count desc, value asc).
std::vector<std::string> replacement_values(const AspectStats& stats, const std::string& lang,
                                            const std::string& category, const std::string& key,
                                            const std::string& original) {
    std::vector<std::string> out;
    if (const auto* vc = stats.find(lang, category, key)) {
        for (const auto& v : *vc) {
            if (v.value != original) out.push_back(v.value);
        }
    }
    return out;
}

} // namespace

GenResult gen_ap(const Catalog& cat, const AspectStats& /*stats*/, const GeneratorConfig& cfg,
                 const std::string& language, size_t count) {
    cfg.validate();
    const auto pool = eligible_listings(cat, language, /*need_aspects=*/true, /*need_price=*/false);
    if (pool.empty()) return shortage_result("listings with aspects", language);

    GenResult r;
    for (uint64_t ordinal = 0; ordinal < count; ++ordinal) {
        CounterRng rng(cfg.seed, rng_stream(TaskKind::AP), ordinal);
        const Listing& l = *pool[rng.bounded(pool.size())];
        const auto& aspect = l.aspects[rng.bounded(l.aspects.size())];

        TaskInstance inst;
        inst.kind = TaskKind::AP;
        inst.language = language;
        inst.prompt = render_ap_prompt(l.category_str(), l.title, aspect.key);
        inst.gold = {aspect.value};
        inst.provenance = {{l.id}, {}, cfg.seed, ordinal};
        r.instances.push_back(std::move(inst));
    }
    finish(r, count, "ap");
    return r;
}

GenResult gen_ap_mc(const Catalog& cat, const AspectStats& stats, const GeneratorConfig& cfg,
                    const std::string& language, size_t count) {
    cfg.validate();
    const size_t min_corrupt = static_cast<size_t>(cfg.corruption_min_aspects);

    // An eligible listing can yield 3 pairwise-distinct corrupted variants.
    struct Entry {
        const Listing* listing;
        std::vector<size_t> corruptible;                   // aspect indices
        std::vector<std::vector<std::string>> replacements; // per corruptible key
    };
    std::vector<Entry> pool;
    for (const auto* l : eligible_listings(cat, language, true, false)) {
        Entry e{l, {}, {}};
        const std::string category = l->category_str();
        size_t single_key_variants = 0;
        for (size_t i = 0; i < l->aspects.size(); ++i) {
            auto repl = replacement_values(stats, language, category, l->aspects[i].key,
                                           l->aspects[i].value);
            if (repl.empty()) continue;
            single_key_variants += repl.size();
            e.corruptible.push_back(i);
            e.replacements.push_back(std::move(repl));
        }
        if (e.corruptible.size() < min_corrupt) continue;
        if (min_corrupt == 1 && single_key_variants < 3) continue;
        pool.push_back(std::move(e));
    }
    if (pool.empty()) return shortage_result("corruptible listings", language);

    GenResult r;
    for (uint64_t ordinal = 0; ordinal < count; ++ordinal) {
        CounterRng rng(cfg.seed, rng_stream(TaskKind::AP_MC), ordinal);
        const Entry& e = pool[rng.bounded(pool.size())];
        const Listing& l = *e.listing;

        std::vector<std::string> distractors;
        std::vector<CorruptionNote> notes;
        bool ok = true;

        if (min_corrupt == 1) {
            // Enumerate every (key, replacement) pair and sample 3 without
            // replacement; distinctness is structural, no retries needed.
            std::vector<std::pair<size_t, const std::string*>> variants;
            for (size_t ci = 0; ci < e.corruptible.size(); ++ci) {
                for (const auto& v : e.replacements[ci]) variants.emplace_back(ci, &v);
            }
            for (const size_t pick : rng.sample_indices(variants.size(), 3)) {
                const auto [ci, value] = variants[pick];
                auto aspects = l.aspects;
                const size_t ai = e.corruptible[ci];
                notes.push_back({aspects[ai].key, aspects[ai].value, *value, ""});
                aspects[ai].value = *value;
                distractors.push_back(render_ap_mc_candidate(l.title, aspects));
            }
        } else {
            std::set<std::string> used;
            used.insert(render_ap_mc_candidate(l.title, l.aspects));
            for (int d = 0; d < 3 && ok; ++d) {
                bool placed = false;
                for (int attempt = 0; attempt < 32 && !placed; ++attempt) {
                    auto aspects = l.aspects;
                    std::vector<CorruptionNote> attempt_notes;
                    for (const size_t ci : rng.sample_indices(e.corruptible.size(), min_corrupt)) {
                        const size_t ai = e.corruptible[ci];
                        const auto& repl = e.replacements[ci];
                        const auto& value = repl[rng.bounded(repl.size())];
                        attempt_notes.push_back({aspects[ai].key, aspects[ai].value, value, ""});
                        aspects[ai].value = value;
                    }
                    auto text = render_ap_mc_candidate(l.title, aspects);
                    if (used.insert(text).second) {
                        distractors.push_back(std::move(text));
                        notes.insert(notes.end(), attempt_notes.begin(), attempt_notes.end());
                        placed = true;
                    }
                }
                ok = placed;
            }
        }

        if (!ok) {
            r.diagnostics.push_back({ordinal, "listing \"" + l.id +
                                                  "\": could not build 3 distinct corrupted candidates"});
            continue;
        }

        TaskInstance inst;
        inst.kind = TaskKind::AP_MC;
        inst.language = language;
        inst.provenance = {{l.id}, std::move(notes), cfg.seed, ordinal};
        place_candidates(rng, render_ap_mc_candidate(l.title, l.aspects), std::move(distractors),
                         inst);
        r.instances.push_back(std::move(inst));
    }
    finish(r, count, "ap_mc");
    return r;
}

GenResult gen_pp_mc(const Catalog& cat, const GeneratorConfig& cfg, const std::string& language,
                    size_t count) {
    cfg.validate();
    const auto pool = eligible_listings(cat, language, /*need_aspects=*/false, /*need_price=*/true);
    if (pool.empty()) return shortage_result("priced listings", language);

    GenResult r;
    for (uint64_t ordinal = 0; ordinal < count; ++ordinal) {
        CounterRng rng(cfg.seed, rng_stream(TaskKind::PP_MC), ordinal);
        const Listing& l = *pool[rng.bounded(pool.size())];
        const Money& price = *l.price;

        std::vector<Money> scaled;
        bool degenerate = false;
        for (const auto& f : cfg.price_factors) {
            const auto m = price.scaled(f);
            if (!m) {
                degenerate = true;
                break;
            }
            // a distractor colliding with the true price or a sibling is
            // skipped, not re-rolled
            if (m->minor_units == price.minor_units) degenerate = true;
            for (const auto& prev : scaled) {
                if (prev.minor_units == m->minor_units) degenerate = true;
            }
            scaled.push_back(*m);
        }
        if (degenerate) {
            r.diagnostics.push_back(
                {ordinal, "listing \"" + l.id + "\": degenerate price distractor set for " +
                              price.symbol() + price.amount_str()});
            continue;
        }

        std::vector<std::string> distractors;
        std::vector<CorruptionNote> notes;
        for (size_t i = 0; i < scaled.size(); ++i) {
            distractors.push_back(render_pp_mc_candidate(l.title, scaled[i]));
            notes.push_back({"price", price.amount_str(), scaled[i].amount_str(),
                             cfg.price_factors[i].str()});
        }

        TaskInstance inst;
        inst.kind = TaskKind::PP_MC;
        inst.language = language;
        inst.provenance = {{l.id}, std::move(notes), cfg.seed, ordinal};
        place_candidates(rng, render_pp_mc_candidate(l.title, price), std::move(distractors), inst);
        r.instances.push_back(std::move(inst));
    }
    finish(r, count, "pp_mc");
    return r;
}

namespace {

// Stats entries for one language with a strict top-1, optionally requiring
// at least `min_values` distinct values. Map order, hence deterministic.
std::vector<std::pair<const StatsKey*, const std::vector<ValueCount>*>>
eligible_stats_entries(const AspectStats& stats, const std::string& lang, size_t min_values) {
    std::vector<std::pair<const StatsKey*, const std::vector<ValueCount>*>> out;
    for (const auto& [key, values] : stats.entries) {
        if (key.language != lang) continue;
        if (values.size() < min_values) continue;
        if (values.size() > 1 && values[0].count == values[1].count) continue;
        out.emplace_back(&key, &values);
    }
    return out;
}

} // namespace

GenResult gen_mca(const AspectStats& stats, const GeneratorConfig& cfg,
                  const std::string& language, size_t count) {
    cfg.validate();
    const auto pool = eligible_stats_entries(stats, language, 1);
    if (pool.empty()) return shortage_result("aspect statistics with a strict top value", language);
    const size_t k = static_cast<size_t>(cfg.mca_top_k);

    GenResult r;
    for (uint64_t ordinal = 0; ordinal < count; ++ordinal) {
        CounterRng rng(cfg.seed, rng_stream(TaskKind::MCA), ordinal);
        const auto& [key, values] = pool[rng.bounded(pool.size())];

        if (values->size() < k) {
            r.diagnostics.push_back({ordinal, "(" + key->category + ", " + key->key +
                                                  "): fewer than " + std::to_string(k) + " values"});
            continue;
        }
        if (values->size() > k && (*values)[k - 1].count == (*values)[k].count) {
            r.diagnostics.push_back({ordinal, "(" + key->category + ", " + key->key +
                                                  "): tie at gold rank " + std::to_string(k)});
            continue;
        }

        TaskInstance inst;
        inst.kind = TaskKind::MCA;
        inst.language = language;
        inst.prompt = render_mca_prompt(key->category, key->key);
        for (size_t i = 0; i < k; ++i) inst.gold.push_back((*values)[i].value);
        inst.provenance = {{}, {}, cfg.seed, ordinal};
        r.instances.push_back(std::move(inst));
    }
    finish(r, count, "mca");
    return r;
}

GenResult gen_mca_mc(const AspectStats& stats, const GeneratorConfig& cfg,
                     const std::string& language, size_t count) {
    cfg.validate();
    const auto pool = eligible_stats_entries(stats, language, 4);
    if (pool.empty()) {
        return shortage_result("aspect statistics with >= 4 values and a strict top value",
                               language);
    }

    GenResult r;
    for (uint64_t ordinal = 0; ordinal < count; ++ordinal) {
        CounterRng rng(cfg.seed, rng_stream(TaskKind::MCA_MC), ordinal);
        const auto& [key, values] = pool[rng.bounded(pool.size())];

        std::vector<std::string> distractors;
        std::vector<CorruptionNote> notes;
        for (const size_t pick : rng.sample_indices(values->size() - 1, 3)) {
            const auto& v = (*values)[1 + pick]; // non-top values only
            distractors.push_back(render_mca_mc_candidate(key->category, key->key, v.value));
            notes.push_back({key->key, (*values)[0].value, v.value, ""});
        }

        TaskInstance inst;
        inst.kind = TaskKind::MCA_MC;
        inst.language = language;
        inst.provenance = {{}, std::move(notes), cfg.seed, ordinal};
        place_candidates(rng, render_mca_mc_candidate(key->category, key->key, (*values)[0].value),
                         std::move(distractors), inst);
        r.instances.push_back(std::move(inst));
    }
    finish(r, count, "mca_mc");
    return r;
}

GenResult generate(TaskKind kind, const Catalog& cat, const AspectStats& stats,
                   const GeneratorConfig& cfg, const std::string& language, size_t count) {
    switch (kind) {
        case TaskKind::AP: return gen_ap(cat, stats, cfg, language, count);
        case TaskKind::AP_MC: return gen_ap_mc(cat, stats, cfg, language, count);
        case TaskKind::PP_MC: return gen_pp_mc(cat, cfg, language, count);
        case TaskKind::MCA: return gen_mca(stats, cfg, language, count);
        case TaskKind::MCA_MC: return gen_mca_mc(stats, cfg, language, count);
    }
    throw ConfigError("unknown task kind");
}

} // namespace ecomlm::taskgen
