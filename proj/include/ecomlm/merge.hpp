#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ecomlm/checkpoint.hpp"

namespace ecomlm::ckpt {

enum class AccumPrecision { F32, F64 };

struct MergeSpec {
    double alpha = 0.5; // weight of the adapted checkpoint, in [0, 1]
    AccumPrecision accum = AccumPrecision::F32;
    int threads = 1;
};

struct CompatReport {
    bool compatible = true;
    std::vector<std::string> mismatches;

    std::string summary() const;
};

// Structural comparison: same tensor names, shapes and element types.
CompatReport check_compat(const Checkpoint& a, const Checkpoint& b);

// merged = (1-alpha)*base + alpha*adapted, elementwise. The blend is formed
// in f64, rounded once to the accumulation precision, then rounded to the
// input element type (round-to-nearest-even). alpha 0 and 1 are exact cast
// round-trips of the corresponding input. Output is bit-identical at any
// thread count. Throws DataError when check_compat fails.
Checkpoint merge(const Checkpoint& base, const Checkpoint& adapted, const MergeSpec& spec);

// One merged file per alpha plus a manifest mapping alpha -> {path, digest}.
// Per-file failures are recorded in the manifest rather than aborting the
// sweep. Returns the manifest (also written to <out_dir>/manifest.json).
nlohmann::json merge_sweep(const Checkpoint& base, const Checkpoint& adapted,
                           const std::vector<double>& alphas, const std::string& out_dir,
                           const MergeSpec& spec = {});

// FNV-1a digest of a file's bytes, hex-encoded; the manifest digest.
std::string file_digest(const std::string& path);

} // namespace ecomlm::ckpt
