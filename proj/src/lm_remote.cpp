#include "ecomlm/lm_remote.hpp"

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ecomlm/errors.hpp"

namespace ecomlm::lm {

using nlohmann::json;

namespace {

// Counting gate with a runtime limit; bounds in-flight requests per backend.
class Gate {
public:
    explicit Gate(int n) : available_(n) {}

    void acquire() {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }

    void release() {
        {
            std::lock_guard lock(m_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    int available_;
};

struct GateGuard {
    explicit GateGuard(Gate& g) : gate(g) { gate.acquire(); }
    ~GateGuard() { gate.release(); }
    Gate& gate;
};

// First integer appearing in a provider error message, e.g. the advertised
// context limit in "maximum context length is 8192 tokens".
long first_integer(const std::string& s) {
    for (size_t i = 0; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            return std::strtol(s.c_str() + i, nullptr, 10);
        }
    }
    return 0;
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
    const auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                                [](char a, char b) {
                                    return std::tolower(static_cast<unsigned char>(a)) ==
                                           std::tolower(static_cast<unsigned char>(b));
                                });
    return it != haystack.end();
}

class RemoteBackend final : public LmBackend {
public:
    explicit RemoteBackend(BackendDescriptor d)
        : desc_(std::move(d)), gate_(std::max(1, desc_.max_concurrency)) {
        if (desc_.base_url.empty()) throw ConfigError("remote backend requires a base URL");
        if (const char* tok = std::getenv(desc_.auth_env.c_str()); tok != nullptr && *tok) {
            auth_token_ = tok;
        }
    }

    ScoreResult score(const ScoreRequest& req) const override {
        if (req.continuation.empty()) throw ConfigError("score: continuation must be non-empty");
        const std::string full = req.context + req.continuation;

        json body;
        body["prompt"] = full;
        body["max_tokens"] = 0;
        body["temperature"] = 0;
        body["logprobs"] = true;
        body["echo"] = true;
        body["stop"] = json::array();
        const json resp = post(body);

        const json* lp = nullptr;
        if (resp.contains("choices") && resp["choices"].is_array() && !resp["choices"].empty()) {
            const auto& choice = resp["choices"][0];
            if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
                lp = &choice["logprobs"];
            }
        }
        if (lp == nullptr || !lp->contains("tokens") || !lp->contains("token_logprobs") ||
            !lp->contains("text_offset")) {
            throw CapabilityError("provider response carries no per-token logprobs "
                                  "(tokens/token_logprobs/text_offset required)");
        }

        const auto& tokens = (*lp)["tokens"];
        const auto& logprobs = (*lp)["token_logprobs"];
        const auto& offsets = (*lp)["text_offset"];
        if (tokens.size() != logprobs.size() || tokens.size() != offsets.size()) {
            throw CapabilityError("provider logprob arrays have mismatched lengths");
        }

        // Continuation region = tokens starting at or after the context/
        // continuation character boundary.
        const auto boundary = static_cast<long>(req.context.size());
        ScoreResult r;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (offsets[i].get<long>() < boundary) continue;
            if (logprobs[i].is_null()) {
                // providers report null for the very first token; it can only
                // be part of the continuation when the context is empty
                if (boundary == 0 && i == 0) {
                    throw CapabilityError("provider reports no logprob for the first token; "
                                          "score with a non-empty context");
                }
                continue;
            }
            r.token_logprobs.push_back({tokens[i].get<std::string>(), logprobs[i].get<double>()});
            r.total_logprob += logprobs[i].get<double>();
        }
        r.token_count = static_cast<long>(r.token_logprobs.size());
        if (r.token_count == 0) {
            throw CapabilityError("provider returned no tokens in the continuation region");
        }
        return r;
    }

    std::string generate(const std::string& prompt, long max_new_tokens,
                         const std::vector<std::string>& stop) const override {
        if (max_new_tokens < 1) throw ConfigError("generate: max_new_tokens must be >= 1");
        json body;
        body["prompt"] = prompt;
        body["max_tokens"] = max_new_tokens;
        body["temperature"] = 0;
        body["logprobs"] = false;
        body["echo"] = false;
        body["stop"] = stop;
        const json resp = post(body);
        if (!resp.contains("choices") || resp["choices"].empty() ||
            !resp["choices"][0].contains("text")) {
            throw CapabilityError("provider response carries no completion text");
        }
        // providers differ on whether the stop string is included; normalize
        return truncate_at_stop(resp["choices"][0]["text"].get<std::string>(), stop);
    }

    const BackendDescriptor& descriptor() const override { return desc_; }

private:
    json post(const json& body) const {
        GateGuard guard(gate_);
        const std::string payload = body.dump();
        std::string last_error;

        const int attempts = 1 + std::max(0, desc_.max_retries);
        for (int attempt = 0; attempt < attempts; ++attempt) {
            if (attempt > 0) {
                const long factor = 1L << std::min(attempt - 1, 3);
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(desc_.retry_backoff_ms * factor));
            }

            httplib::Client client(desc_.base_url);
            client.set_connection_timeout(0, desc_.timeout_ms * 1000);
            client.set_read_timeout(desc_.timeout_ms / 1000, (desc_.timeout_ms % 1000) * 1000);
            httplib::Headers headers;
            if (!auth_token_.empty()) {
                headers.emplace("Authorization", "Bearer " + auth_token_);
            }

            auto res = client.Post(desc_.path, headers, payload, "application/json");
            if (!res) {
                last_error = "connection failed: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 200) {
                json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
                if (parsed.is_discarded()) {
                    last_error = "provider returned unparseable JSON";
                    continue;
                }
                return parsed;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            fail_permanent(res->status, res->body, attempt + 1);
        }
        throw TransportError("request failed after " + std::to_string(attempts) +
                                 " attempts: " + last_error,
                             attempts);
    }

    [[noreturn]] void fail_permanent(int status, const std::string& body, int attempts) const {
        if (contains_ci(body, "context")&& (contains_ci(body, "length") || contains_ci(body, "window"))) {
            long limit = first_integer(body);
            if (limit == 0 && desc_.max_context_tokens) limit = *desc_.max_context_tokens;
            throw ContextOverflowError("request exceeds the provider context limit of " +
                                           std::to_string(limit) + " tokens",
                                       limit);
        }
        if (contains_ci(body, "logprob")) {
            throw CapabilityError("provider refuses logprobs: " + body);
        }
        throw TransportError("HTTP " + std::to_string(status) + ": " + body, attempts);
    }

    BackendDescriptor desc_;
    std::string auth_token_;
    mutable Gate gate_;
};

} // namespace

std::shared_ptr<LmBackend> make_remote(const BackendDescriptor& d) {
    return std::make_shared<RemoteBackend>(d);
}

std::shared_ptr<LmBackend> make_backend(const BackendDescriptor& d) {
    switch (d.kind) {
        case BackendKind::Remote: return make_remote(d);
        case BackendKind::MockUniform: return make_mock_uniform(d);
        case BackendKind::MockHash: return make_mock_hash(d);
        case BackendKind::MockOracle:
            throw ConfigError("mock-oracle needs gold data; construct MockOracle directly");
    }
    throw ConfigError("unknown backend kind");
}

} // namespace ecomlm::lm
