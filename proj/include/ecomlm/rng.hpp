#pragma once

#include <cstdint>
#include <vector>

namespace ecomlm {

// Counter-based generator: the state is derived from a (seed, stream, ordinal)
// key, so item i of a run is reproducible without generating items 0..i-1.
// The mixing function is the splitmix64 finalizer; the draw sequence of every
// consumer is part of the reproducibility contract and must not be reordered.
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream, uint64_t ordinal)
        : state_(chain(chain(chain(0x243F6A8885A308D3ull, seed), stream), ordinal)) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    // Unbiased integer in [0, n). n must be > 0.
    uint64_t bounded(uint64_t n) {
        uint64_t x = next_u64();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<unsigned __int128>(x) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First k entries of a Fisher-Yates pass over [0, n): a uniform
    // k-subset sample without replacement, in draw order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (size_t i = 0; i < k; ++i) {
            const size_t j = i + static_cast<size_t>(bounded(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

private:
    static uint64_t chain(uint64_t h, uint64_t v) {
        return mix(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
    }

    uint64_t state_;
};

// FNV-1a over arbitrary bytes, used for content digests and the hash mock.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xCBF29CE484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace ecomlm
