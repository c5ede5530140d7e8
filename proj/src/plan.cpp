#include "ecomlm/plan.hpp"

#include <cmath>

#include "ecomlm/errors.hpp"

namespace ecomlm::plan {

using nlohmann::json;

void ScheduleConfig::validate() const {
    if (lr_max <= 0 || lr_min <= 0) throw ConfigError("learning rates must be positive");
    if (lr_min >= lr_max) throw ConfigError("lr_min must be < lr_max");
    if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
    if (total_steps <= warmup_steps) throw ConfigError("total_steps must exceed warmup_steps");
}

ScheduleConfig ScheduleConfig::profile_8b() {
    return ScheduleConfig{3.0e-5, 3.0e-6, 2000, 85000};
}

ScheduleConfig ScheduleConfig::profile_70b() {
    return ScheduleConfig{1.5e-5, 3.0e-6, 2000, 85000};
}

double lr_at(long step, const ScheduleConfig& cfg) {
    cfg.validate();
    if (step < 0 || step > cfg.total_steps) {
        throw ConfigError("step " + std::to_string(step) + " outside [0, " +
                          std::to_string(cfg.total_steps) + "]");
    }
    if (step < cfg.warmup_steps) {
        return cfg.lr_max * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    }
    // endpoints are pinned exactly; cosine interpolates in between
    if (step == cfg.warmup_steps) return cfg.lr_max;
    if (step == cfg.total_steps) return cfg.lr_min;
    const double progress = static_cast<double>(step - cfg.warmup_steps) /
                            static_cast<double>(cfg.total_steps - cfg.warmup_steps);
    return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(M_PI * progress));
}

void MixtureConfig::validate() const {
    if (domain_ratio < 0.0 || domain_ratio > 1.0) {
        throw ConfigError("domain_ratio must be in [0, 1]");
    }
    if (batch_tokens == 0) throw ConfigError("batch_tokens must be positive");
    if (general_non_english_ratio &&
        (*general_non_english_ratio < 0.0 || *general_non_english_ratio > 1.0)) {
        throw ConfigError("general_non_english_ratio must be in [0, 1]");
    }
}

json TokenBudget::to_json() const {
    return json{{"total_tokens", total_tokens},
                {"domain_tokens", domain_tokens},
                {"general_tokens", general_tokens},
                {"domain_pct", domain_pct},
                {"general_pct", general_pct}};
}

TokenBudget token_budget(const MixtureConfig& cfg, long total_steps) {
    cfg.validate();
    if (total_steps <= 0) throw ConfigError("total_steps must be positive");
    TokenBudget b;
    b.total_tokens = cfg.batch_tokens * static_cast<uint64_t>(total_steps);
    b.domain_tokens = static_cast<uint64_t>(
        std::llround(static_cast<double>(b.total_tokens) * cfg.domain_ratio));
    b.general_tokens = b.total_tokens - b.domain_tokens;
    b.domain_pct = 100.0 * static_cast<double>(b.domain_tokens) / static_cast<double>(b.total_tokens);
    b.general_pct = 100.0 - b.domain_pct;
    return b;
}

const char* stream_label_name(StreamLabel l) {
    switch (l) {
        case StreamLabel::Domain: return "domain";
        case StreamLabel::General: return "general";
        case StreamLabel::GeneralNonEnglish: return "general_non_en";
    }
    return "?";
}

std::vector<StreamLabel> mixture_stream(const MixtureConfig& cfg, size_t n) {
    cfg.validate();
    if (n < 1) throw ConfigError("mixture_stream: n must be >= 1");

    std::vector<StreamLabel> labels;
    labels.reserve(n);
    uint64_t domain_count = 0;
    uint64_t general_count = 0;
    uint64_t general_non_en = 0;
    const double sub_ratio = cfg.general_non_english_ratio.value_or(0.0);

    for (size_t k = 1; k <= n; ++k) {
        const auto target = static_cast<uint64_t>(
            std::floor(static_cast<double>(k) * cfg.domain_ratio));
        if (target > domain_count) {
            labels.push_back(StreamLabel::Domain);
            ++domain_count;
            continue;
        }
        ++general_count;
        const auto sub_target = static_cast<uint64_t>(
            std::floor(static_cast<double>(general_count) * sub_ratio));
        if (sub_target > general_non_en) {
            labels.push_back(StreamLabel::GeneralNonEnglish);
            ++general_non_en;
        } else {
            labels.push_back(StreamLabel::General);
        }
    }
    return labels;
}

} // namespace ecomlm::plan
