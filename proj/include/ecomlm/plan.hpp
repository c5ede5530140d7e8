#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ecomlm::plan {

// Cosine decay to lr_min after a linear warmup from 0. Defaults mirror the
// continued-pretraining profiles: lr_max 3.0e-5 (8B) or 1.5e-5 (70B),
// lr_min 3.0e-6, 85k total steps.
struct ScheduleConfig {
    double lr_max = 3.0e-5;
    double lr_min = 3.0e-6;
    long warmup_steps = 2000;
    long total_steps = 85000;

    void validate() const;

    static ScheduleConfig profile_8b();
    static ScheduleConfig profile_70b();
};

// lr at `step` in [0, total_steps]. Exactly lr_max at the end of warmup and
// exactly lr_min at total_steps. Throws ConfigError outside the range.
double lr_at(long step, const ScheduleConfig& cfg);

struct MixtureConfig {
    double domain_ratio = 0.5;          // in-domain share of the mix
    uint64_t batch_tokens = 11'800'000; // "ca. 11.8 million tokens" per step
    uint64_t seed = 0;
    // Optional non-English share within the general stream only.
    std::optional<double> general_non_english_ratio;

    void validate() const;
};

struct TokenBudget {
    uint64_t total_tokens = 0;
    uint64_t domain_tokens = 0;
    uint64_t general_tokens = 0;
    double domain_pct = 0.0;
    double general_pct = 0.0;

    nlohmann::json to_json() const;
};

// total = batch_tokens * total_steps (exact integer product); the domain
// split is total * ratio rounded to the nearest token.
TokenBudget token_budget(const MixtureConfig& cfg, long total_steps);

enum class StreamLabel { Domain, General, GeneralNonEnglish };
const char* stream_label_name(StreamLabel l);

// Deterministic error-accumulator interleave: after any prefix of length k
// the domain count is floor(k * r), so |count - k*r| < 1 everywhere. The
// label pattern depends only on the ratio; the seed is reserved for
// permuting items within each stream, not the pattern. When
// general_non_english_ratio is set the same rule splits the general
// positions into English/non-English sub-labels.
std::vector<StreamLabel> mixture_stream(const MixtureConfig& cfg, size_t n);

} // namespace ecomlm::plan
