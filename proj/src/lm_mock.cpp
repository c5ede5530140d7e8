#include <algorithm>
#include <cmath>

#include "ecomlm/errors.hpp"
#include "ecomlm/lm.hpp"
#include "ecomlm/rng.hpp"

namespace ecomlm::lm {

const char* backend_kind_name(BackendKind k) {
    switch (k) {
        case BackendKind::Remote: return "remote";
        case BackendKind::MockUniform: return "mock-uniform";
        case BackendKind::MockOracle: return "mock-oracle";
        case BackendKind::MockHash: return "mock-hash";
    }
    return "?";
}

std::optional<BackendKind> backend_kind_from_name(const std::string& name) {
    if (name == "remote") return BackendKind::Remote;
    if (name == "mock-uniform") return BackendKind::MockUniform;
    if (name == "mock-oracle") return BackendKind::MockOracle;
    if (name == "mock-hash") return BackendKind::MockHash;
    return std::nullopt;
}

std::string BackendDescriptor::describe() const {
    std::string out = backend_kind_name(kind);
    if (kind == BackendKind::Remote) {
        out += " " + base_url + path;
    } else if (kind == BackendKind::MockUniform) {
        out += " vocab=" + std::to_string(vocab_size);
    } else if (kind == BackendKind::MockHash) {
        out += " seed=" + std::to_string(hash_seed);
    }
    return out;
}

std::string truncate_at_stop(const std::string& text, const std::vector<std::string>& stop) {
    size_t cut = text.size();
    for (const auto& s : stop) {
        if (s.empty()) continue;
        const auto pos = text.find(s);
        if (pos != std::string::npos) cut = std::min(cut, pos);
    }
    return text.substr(0, cut);
}

namespace {

void require_scoreable(const ScoreRequest& req) {
    if (req.continuation.empty()) {
        throw ConfigError("score: continuation must be non-empty");
    }
}

class MockUniform final : public LmBackend {
public:
    explicit MockUniform(BackendDescriptor d) : desc_(std::move(d)) {
        if (desc_.vocab_size < 2) throw ConfigError("mock-uniform: vocab_size must be >= 2");
        per_byte_ = -std::log(static_cast<double>(desc_.vocab_size));
    }

    ScoreResult score(const ScoreRequest& req) const override {
        require_scoreable(req);
        ScoreResult r;
        r.token_logprobs.reserve(req.continuation.size());
        for (const char c : req.continuation) {
            r.token_logprobs.push_back({std::string(1, c), per_byte_});
            r.total_logprob += per_byte_;
        }
        r.token_count = static_cast<long>(req.continuation.size());
        return r;
    }

    std::string generate(const std::string&, long, const std::vector<std::string>&) const override {
        return "";
    }

    const BackendDescriptor& descriptor() const override { return desc_; }

private:
    BackendDescriptor desc_;
    double per_byte_;
};

class MockHash final : public LmBackend {
public:
    explicit MockHash(BackendDescriptor d) : desc_(std::move(d)) {}

    ScoreResult score(const ScoreRequest& req) const override {
        require_scoreable(req);
        uint64_t h = fnv1a64(req.context.data(), req.context.size(), seed_state());
        ScoreResult r;
        r.token_logprobs.reserve(req.continuation.size());
        for (const char c : req.continuation) {
            h = step(h, c);
            const double lp = byte_logprob(h);
            r.token_logprobs.push_back({std::string(1, c), lp});
            r.total_logprob += lp;
        }
        r.token_count = static_cast<long>(req.continuation.size());
        return r;
    }

    std::string generate(const std::string& prompt, long max_new_tokens,
                         const std::vector<std::string>& stop) const override {
        uint64_t h = fnv1a64(prompt.data(), prompt.size(), seed_state());
        std::string out;
        for (long i = 0; i < max_new_tokens; ++i) {
            uint64_t best_u = 0;
            char best_c = ' ';
            for (int c = 32; c < 127; ++c) {
                const uint64_t u = CounterRng::mix(step(h, static_cast<char>(c)));
                if (u > best_u) {
                    best_u = u;
                    best_c = static_cast<char>(c);
                }
            }
            out.push_back(best_c);
            h = step(h, best_c);
            for (const auto& s : stop) {
                if (!s.empty() && out.size() >= s.size() &&
                    out.compare(out.size() - s.size(), s.size(), s) == 0) {
                    return out.substr(0, out.size() - s.size());
                }
            }
        }
        return truncate_at_stop(out, stop);
    }

    const BackendDescriptor& descriptor() const override { return desc_; }

private:
    uint64_t seed_state() const { return 0xCBF29CE484222325ull ^ CounterRng::mix(desc_.hash_seed); }

    static uint64_t step(uint64_t h, char c) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
        return h;
    }

    static double byte_logprob(uint64_t prefix_hash) {
        const double u = static_cast<double>(CounterRng::mix(prefix_hash) >> 11) * 0x1.0p-53;
        return -(0.01 + u);
    }

    BackendDescriptor desc_;
};

} // namespace

MockOracle::MockOracle(BackendDescriptor d, std::vector<std::string> gold_texts,
                       std::map<std::string, std::string> gold_continuations)
    : desc_(std::move(d)),
      gold_texts_(std::move(gold_texts)),
      gold_continuations_(std::move(gold_continuations)) {
    gold_texts_.erase(std::remove_if(gold_texts_.begin(), gold_texts_.end(),
                                     [](const std::string& s) { return s.empty(); }),
                      gold_texts_.end());
}

ScoreResult MockOracle::score(const ScoreRequest& req) const {
    require_scoreable(req);

    // Alive match lengths per gold text: length l means the last l bytes seen
    // equal gold[0..l). A byte scores as gold while it extends (or completes)
    // some match; this depends only on the text prefix, which keeps scoring
    // autoregressive and therefore additive over continuation splits.
    std::vector<std::vector<size_t>> alive(gold_texts_.size());
    const auto feed = [&](char c) {
        bool good = false;
        for (size_t g = 0; g < gold_texts_.size(); ++g) {
            const std::string& gold = gold_texts_[g];
            std::vector<size_t> next;
            for (const size_t l : alive[g]) {
                if (gold[l] == c) {
                    good = true;
                    if (l + 1 < gold.size()) next.push_back(l + 1);
                }
            }
            if (gold[0] == c) {
                good = true;
                if (gold.size() > 1) next.push_back(1);
            }
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            alive[g] = std::move(next);
        }
        return good;
    };

    for (const char c : req.context) feed(c);

    ScoreResult r;
    r.token_logprobs.reserve(req.continuation.size());
    for (const char c : req.continuation) {
        const double lp = feed(c) ? kGoldLogprob : kOtherLogprob;
        r.token_logprobs.push_back({std::string(1, c), lp});
        r.total_logprob += lp;
    }
    r.token_count = static_cast<long>(req.continuation.size());
    return r;
}

std::string MockOracle::generate(const std::string& prompt, long max_new_tokens,
                                 const std::vector<std::string>& stop) const {
    for (const auto& [key, continuation] : gold_continuations_) {
        if (key.size() <= prompt.size() &&
            prompt.compare(prompt.size() - key.size(), key.size(), key) == 0) {
            std::string out = truncate_at_stop(continuation, stop);
            if (static_cast<long>(out.size()) > max_new_tokens) {
                out.resize(static_cast<size_t>(max_new_tokens));
            }
            return out;
        }
    }
    return "";
}

std::shared_ptr<LmBackend> make_mock_uniform(const BackendDescriptor& d) {
    return std::make_shared<MockUniform>(d);
}

std::shared_ptr<LmBackend> make_mock_hash(const BackendDescriptor& d) {
    return std::make_shared<MockHash>(d);
}

} // namespace ecomlm::lm
