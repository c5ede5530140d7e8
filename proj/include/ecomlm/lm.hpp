#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ecomlm::lm {

struct ScoreRequest {
    std::string context;      // may be empty
    std::string continuation; // non-empty
    std::optional<long> max_context_tokens;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0; // natural log, <= 0
};

struct ScoreResult {
    std::vector<TokenLogprob> token_logprobs; // continuation region only
    double total_logprob = 0.0;
    long token_count = 0;
};

enum class BackendKind { Remote, MockUniform, MockOracle, MockHash };

struct BackendDescriptor {
    BackendKind kind = BackendKind::MockHash;
    std::string base_url;                  // remote
    std::string path = "/v1/completions";  // remote
    std::string auth_env = "ECOMLM_API_TOKEN";
    long timeout_ms = 30000;
    int max_retries = 3;
    int max_concurrency = 4;
    long retry_backoff_ms = 250; // doubled per attempt, capped at 8x
    std::optional<long> max_context_tokens;
    uint64_t vocab_size = 256; // mock-uniform
    uint64_t hash_seed = 0;    // mock-hash

    std::string describe() const;
};

std::optional<BackendKind> backend_kind_from_name(const std::string& name);
const char* backend_kind_name(BackendKind k);

// Scoring/generation capability. Implementations are internally synchronized;
// callers may invoke score/generate concurrently from any number of threads.
class LmBackend {
public:
    virtual ~LmBackend() = default;

    // Log-probability of `continuation` conditioned on `context`, with
    // per-token detail. Throws ConfigError on an empty continuation.
    virtual ScoreResult score(const ScoreRequest& req) const = 0;

    // Greedy continuation, truncated at the earliest stop string or at
    // max_new_tokens.
    virtual std::string generate(const std::string& prompt, long max_new_tokens,
                                 const std::vector<std::string>& stop) const = 0;

    virtual const BackendDescriptor& descriptor() const = 0;
};

// The mock backends tokenize at byte granularity: one token per byte of the
// continuation. Every per-byte log-probability depends only on the text up
// to and including that byte, so scores obey the autoregressive chain rule
// exactly: score(c, a+b) = score(c, a) + score(c+a, b).

// Every byte costs -ln(vocab_size). Generation returns "" (a uniform model
// prefers nothing).
std::shared_ptr<LmBackend> make_mock_uniform(const BackendDescriptor& d);

// Pseudo-random but fully deterministic: byte at prefix p costs
// -(0.01 + u(p)) with u(p) in [0,1) keyed by (hash_seed, p). Scores of
// distinct texts are uncorrelated. Generation greedily picks the printable
// byte with the highest u.
std::shared_ptr<LmBackend> make_mock_hash(const BackendDescriptor& d);

// Scores -0.001 per byte while the text is tracing out one of the configured
// gold texts, -5.0 otherwise (fixed constants of the contract). Generation
// looks up the configured continuation whose prompt key suffixes the prompt.
class MockOracle : public LmBackend {
public:
    MockOracle(BackendDescriptor d, std::vector<std::string> gold_texts,
               std::map<std::string, std::string> gold_continuations);

    ScoreResult score(const ScoreRequest& req) const override;
    std::string generate(const std::string& prompt, long max_new_tokens,
                         const std::vector<std::string>& stop) const override;
    const BackendDescriptor& descriptor() const override { return desc_; }

    static constexpr double kGoldLogprob = -0.001;
    static constexpr double kOtherLogprob = -5.0;

private:
    BackendDescriptor desc_;
    std::vector<std::string> gold_texts_;
    std::map<std::string, std::string> gold_continuations_;
};

// Applies stop-string truncation: text up to (excluding) the earliest
// occurrence of any stop string.
std::string truncate_at_stop(const std::string& text, const std::vector<std::string>& stop);

} // namespace ecomlm::lm
