#include "ecomlm/merge.hpp"

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "ecomlm/rng.hpp"

namespace ecomlm::ckpt {

using nlohmann::json;

std::string CompatReport::summary() const {
    if (compatible) return "compatible";
    std::string out = "incompatible:";
    for (const auto& m : mismatches) {
        out += "\n  ";
        out += m;
    }
    return out;
}

namespace {

std::string shape_str(const std::vector<int64_t>& shape) {
    std::string out = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

} // namespace

CompatReport check_compat(const Checkpoint& a, const Checkpoint& b) {
    CompatReport report;
    for (const auto& [name, ta] : a.tensors) {
        const auto it = b.tensors.find(name);
        if (it == b.tensors.end()) {
            report.mismatches.push_back("tensor \"" + name + "\" missing from the second checkpoint");
            continue;
        }
        const Tensor& tb = it->second;
        if (ta.dtype != tb.dtype) {
            report.mismatches.push_back("tensor \"" + name + "\" dtype " + dtype_name(ta.dtype) +
                                        " vs " + dtype_name(tb.dtype));
        }
        if (ta.shape != tb.shape) {
            report.mismatches.push_back("tensor \"" + name + "\" shape " + shape_str(ta.shape) +
                                        " vs " + shape_str(tb.shape));
        }
    }
    for (const auto& [name, tb] : b.tensors) {
        if (!a.tensors.count(name)) {
            report.mismatches.push_back("tensor \"" + name + "\" missing from the first checkpoint");
        }
    }
    report.compatible = report.mismatches.empty();
    return report;
}

namespace {

double load_element(Dtype d, const uint8_t* p) {
    switch (d) {
        case Dtype::F32: {
            float f;
            std::memcpy(&f, p, 4);
            return static_cast<double>(f);
        }
        case Dtype::F16: {
            uint16_t h;
            std::memcpy(&h, p, 2);
            return static_cast<double>(f16_to_f32(h));
        }
        case Dtype::BF16: {
            uint16_t h;
            std::memcpy(&h, p, 2);
            return static_cast<double>(bf16_to_f32(h));
        }
    }
    return 0;
}

void store_element(Dtype d, double v, uint8_t* p) {
    switch (d) {
        case Dtype::F32: {
            const auto f = static_cast<float>(v);
            std::memcpy(p, &f, 4);
            return;
        }
        case Dtype::F16: {
            const uint16_t h = f32_to_f16(static_cast<float>(v));
            std::memcpy(p, &h, 2);
            return;
        }
        case Dtype::BF16: {
            const uint16_t h = f32_to_bf16(static_cast<float>(v));
            std::memcpy(p, &h, 2);
            return;
        }
    }
}

// Cast round-trip through the accumulation precision, used for the exact
// alpha endpoints.
void copy_through_accum(const Tensor& src, Tensor& dst, AccumPrecision accum) {
    const size_t esize = dtype_size(src.dtype);
    const size_t n = src.data.size() / esize;
    for (size_t i = 0; i < n; ++i) {
        double v = load_element(src.dtype, src.data.data() + i * esize);
        if (accum == AccumPrecision::F32) v = static_cast<double>(static_cast<float>(v));
        store_element(src.dtype, v, dst.data.data() + i * esize);
    }
}

void blend_tensor(const Tensor& base, const Tensor& adapted, Tensor& out, double alpha,
                  AccumPrecision accum) {
    const size_t esize = dtype_size(base.dtype);
    const size_t n = base.data.size() / esize;
    const double wa = 1.0 - alpha;
    for (size_t i = 0; i < n; ++i) {
        const double a = load_element(base.dtype, base.data.data() + i * esize);
        const double b = load_element(adapted.dtype, adapted.data.data() + i * esize);
        double v = wa * a + alpha * b;
        if (accum == AccumPrecision::F32) v = static_cast<double>(static_cast<float>(v));
        store_element(base.dtype, v, out.data.data() + i * esize);
    }
}

} // namespace

Checkpoint merge(const Checkpoint& base, const Checkpoint& adapted, const MergeSpec& spec) {
    if (spec.alpha < 0.0 || spec.alpha > 1.0) {
        throw ConfigError("merge: alpha must be in [0, 1]");
    }
    const auto compat = check_compat(base, adapted);
    if (!compat.compatible) {
        throw DataError("merge: checkpoints are structurally incompatible\n" + compat.summary());
    }

    Checkpoint out;
    std::vector<std::pair<const std::string*, Tensor*>> work;
    for (const auto& [name, t] : base.tensors) {
        Tensor shell;
        shell.dtype = t.dtype;
        shell.shape = t.shape;
        shell.data.resize(t.data.size());
        auto [it, ok] = out.tensors.emplace(name, std::move(shell));
        work.emplace_back(&it->first, &it->second);
    }

    std::atomic<size_t> cursor{0};
    const auto run = [&] {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= work.size()) return;
            const std::string& name = *work[i].first;
            const Tensor& tb = base.tensors.at(name);
            const Tensor& ta = adapted.tensors.at(name);
            Tensor& dst = *work[i].second;
            if (spec.alpha == 0.0) {
                copy_through_accum(tb, dst, spec.accum);
            } else if (spec.alpha == 1.0) {
                copy_through_accum(ta, dst, spec.accum);
            } else {
                blend_tensor(tb, ta, dst, spec.alpha, spec.accum);
            }
        }
    };

    const int threads = std::max(1, spec.threads);
    if (threads == 1 || work.size() <= 1) {
        run();
    } else {
        std::vector<std::thread> ts;
        for (int t = 0; t < threads; ++t) ts.emplace_back(run);
        for (auto& t : ts) t.join();
    }

    char producer[160];
    std::snprintf(producer, sizeof(producer), "ecomlm merge alpha=%.17g accum=%s", spec.alpha,
                  spec.accum == AccumPrecision::F32 ? "f32" : "f64");
    out.meta.producer = producer;
    out.meta.alpha = spec.alpha;
    out.meta.parents = {base.digest(), adapted.digest()};
    return out;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read file for digest: " + path);
    uint64_t h = 0xCBF29CE484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
    return hex;
}

json merge_sweep(const Checkpoint& base, const Checkpoint& adapted,
                 const std::vector<double>& alphas, const std::string& out_dir,
                 const MergeSpec& spec) {
    if (alphas.empty()) throw ConfigError("merge_sweep: empty alpha list");
    for (size_t i = 0; i < alphas.size(); ++i) {
        if (alphas[i] < 0.0 || alphas[i] > 1.0) {
            throw ConfigError("merge_sweep: alphas must lie in [0, 1]");
        }
        if (i > 0 && alphas[i] <= alphas[i - 1]) {
            throw ConfigError("merge_sweep: alphas must be sorted and distinct");
        }
    }
    std::filesystem::create_directories(out_dir);

    json manifest;
    manifest["schema"] = 1;
    manifest["base_digest"] = base.digest();
    manifest["adapted_digest"] = adapted.digest();
    manifest["accum"] = spec.accum == AccumPrecision::F32 ? "f32" : "f64";
    json entries = json::array();
    bool complete = true;

    for (size_t i = 0; i < alphas.size(); ++i) {
        char fname[64];
        std::snprintf(fname, sizeof(fname), "merged_%03zu.eckpt", i);
        const std::string path = out_dir + "/" + fname;
        json entry;
        entry["alpha"] = alphas[i];
        entry["path"] = fname;
        try {
            MergeSpec one = spec;
            one.alpha = alphas[i];
            write_checkpoint(path, merge(base, adapted, one));
            entry["digest"] = file_digest(path);
        } catch (const std::exception& e) {
            entry["error"] = e.what();
            complete = false;
        }
        entries.push_back(std::move(entry));
    }
    manifest["entries"] = std::move(entries);
    manifest["complete"] = complete;

    std::ofstream out(out_dir + "/manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write manifest in " + out_dir);
    out << manifest.dump(2) << '\n';
    return manifest;
}

} // namespace ecomlm::ckpt
