#include "ecomlm/checkpoint.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "ecomlm/rng.hpp"

namespace ecomlm::ckpt {

using nlohmann::json;

const char* dtype_name(Dtype d) {
    switch (d) {
        case Dtype::F32: return "f32";
        case Dtype::F16: return "f16";
        case Dtype::BF16: return "bf16";
    }
    return "?";
}

std::optional<Dtype> dtype_from_name(const std::string& s) {
    if (s == "f32") return Dtype::F32;
    if (s == "f16") return Dtype::F16;
    if (s == "bf16") return Dtype::BF16;
    return std::nullopt;
}

size_t dtype_size(Dtype d) {
    return d == Dtype::F32 ? 4 : 2;
}

int64_t Tensor::element_count() const {
    int64_t n = 1;
    for (const int64_t d : shape) n *= d;
    return n;
}

std::string Checkpoint::digest() const {
    uint64_t h = 0xCBF29CE484222325ull;
    for (const auto& [name, t] : tensors) {
        h = fnv1a64(name.data(), name.size(), h);
        const auto dn = std::string(dtype_name(t.dtype));
        h = fnv1a64(dn.data(), dn.size(), h);
        h = fnv1a64(t.shape.data(), t.shape.size() * sizeof(int64_t), h);
        h = fnv1a64(t.data.data(), t.data.size(), h);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

// ---- element conversions ----

uint16_t f32_to_f16(float f) {
    const uint32_t x = std::bit_cast<uint32_t>(f);
    const uint32_t sign = (x >> 16) & 0x8000u;
    uint32_t mant = x & 0x7FFFFFu;
    const int32_t biased = static_cast<int32_t>((x >> 23) & 0xFFu);

    if (biased == 0xFF) { // inf / nan
        if (mant == 0) return static_cast<uint16_t>(sign | 0x7C00u);
        uint32_t payload = mant >> 13;
        if (payload == 0) payload = 1; // keep nan a nan
        return static_cast<uint16_t>(sign | 0x7C00u | payload);
    }

    const int32_t exp = biased - 127 + 15;
    if (exp >= 0x1F) return static_cast<uint16_t>(sign | 0x7C00u); // overflow
    if (exp <= 0) {
        if (exp < -10) return static_cast<uint16_t>(sign); // underflow to zero
        mant |= 0x800000u;
        const uint32_t shift = static_cast<uint32_t>(14 - exp);
        uint32_t half = mant >> shift;
        const uint32_t rem = mant & ((1u << shift) - 1);
        const uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (half & 1))) ++half;
        return static_cast<uint16_t>(sign | half);
    }

    uint32_t half = sign | (static_cast<uint32_t>(exp) << 10) | (mant >> 13);
    const uint32_t rem = mant & 0x1FFFu;
    if (rem > 0x1000u || (rem == 0x1000u && (half & 1))) ++half; // carry may roll into inf
    return static_cast<uint16_t>(half);
}

float f16_to_f32(uint16_t h) {
    const uint32_t sign = static_cast<uint32_t>(h & 0x8000u) << 16;
    uint32_t exp = (h >> 10) & 0x1Fu;
    uint32_t mant = h & 0x3FFu;
    uint32_t x;
    if (exp == 0) {
        if (mant == 0) {
            x = sign;
        } else {
            exp = 127 - 15 + 1;
            while (!(mant & 0x400u)) {
                mant <<= 1;
                --exp;
            }
            mant &= 0x3FFu;
            x = sign | (exp << 23) | (mant << 13);
        }
    } else if (exp == 0x1F) {
        x = sign | 0x7F800000u | (mant << 13);
    } else {
        x = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(x);
}

uint16_t f32_to_bf16(float f) {
    const uint32_t x = std::bit_cast<uint32_t>(f);
    if ((x & 0x7FFFFFFFu) > 0x7F800000u) {
        return static_cast<uint16_t>((x >> 16) | 0x0040u); // quiet nan
    }
    const uint32_t rounded = x + 0x7FFFu + ((x >> 16) & 1u);
    return static_cast<uint16_t>(rounded >> 16);
}

float bf16_to_f32(uint16_t b) {
    return std::bit_cast<float>(static_cast<uint32_t>(b) << 16);
}

// ---- container io ----

namespace {

void append_u64_le(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t read_u64_le(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace

std::vector<uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    json header;
    uint64_t offset = 0;
    for (const auto& [name, t] : ckpt.tensors) {
        json entry;
        entry["dtype"] = dtype_name(t.dtype);
        entry["shape"] = t.shape;
        entry["offset"] = offset;
        entry["len"] = t.data.size();
        header[name] = std::move(entry);
        offset += t.data.size();
    }
    json meta;
    meta["producer"] = ckpt.meta.producer;
    if (ckpt.meta.alpha) meta["alpha"] = *ckpt.meta.alpha;
    if (!ckpt.meta.parents.empty()) meta["parents"] = ckpt.meta.parents;
    header["__meta__"] = std::move(meta);

    const std::string header_str = header.dump();
    std::vector<uint8_t> out;
    out.reserve(16 + header_str.size() + offset);
    out.insert(out.end(), kMagic, kMagic + 8);
    append_u64_le(out, header_str.size());
    out.insert(out.end(), header_str.begin(), header_str.end());
    for (const auto& [name, t] : ckpt.tensors) {
        out.insert(out.end(), t.data.begin(), t.data.end());
    }
    return out;
}

Checkpoint deserialize_checkpoint(const std::vector<uint8_t>& bytes, const std::string& origin) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw FormatError(origin + ": bad magic or container version");
    }
    const uint64_t header_len = read_u64_le(bytes.data() + 8);
    if (16 + header_len > bytes.size()) {
        throw CorruptionError(origin + ": header length exceeds file size");
    }
    const json header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + header_len, nullptr,
                                    /*allow_exceptions=*/false);
    if (header.is_discarded() || !header.is_object()) {
        throw FormatError(origin + ": header is not valid JSON");
    }

    Checkpoint ckpt;
    const size_t data_begin = 16 + header_len;
    const size_t data_size = bytes.size() - data_begin;
    uint64_t expected_offset = 0;

    for (const auto& [name, entry] : header.items()) {
        if (name == "__meta__") {
            ckpt.meta.producer = entry.value("producer", "");
            if (entry.contains("alpha")) ckpt.meta.alpha = entry["alpha"].get<double>();
            if (entry.contains("parents")) {
                ckpt.meta.parents = entry["parents"].get<std::vector<std::string>>();
            }
            continue;
        }
        Tensor t;
        const auto dtype = dtype_from_name(entry.value("dtype", ""));
        if (!dtype) throw FormatError(origin + ": tensor \"" + name + "\" has unknown dtype");
        t.dtype = *dtype;
        t.shape = entry.value("shape", std::vector<int64_t>{});
        for (const int64_t d : t.shape) {
            if (d <= 0) throw FormatError(origin + ": tensor \"" + name + "\" has non-positive dim");
        }
        const uint64_t offset = entry.value("offset", uint64_t{0});
        const uint64_t len = entry.value("len", uint64_t{0});
        const uint64_t expected_len =
            static_cast<uint64_t>(t.element_count()) * dtype_size(t.dtype);
        if (len != expected_len) {
            throw CorruptionError(origin + ": tensor \"" + name + "\" length " +
                                  std::to_string(len) + " does not match shape (expected " +
                                  std::to_string(expected_len) + ")");
        }
        if (offset != expected_offset) {
            throw CorruptionError(origin + ": tensor \"" + name + "\" offset " +
                                  std::to_string(offset) + " breaks contiguity (expected " +
                                  std::to_string(expected_offset) + ")");
        }
        if (offset + len > data_size) {
            throw CorruptionError(origin + ": data truncated in tensor \"" + name + "\"");
        }
        t.data.assign(bytes.begin() + static_cast<long>(data_begin + offset),
                      bytes.begin() + static_cast<long>(data_begin + offset + len));
        expected_offset = offset + len;
        ckpt.tensors.emplace(name, std::move(t));
    }
    if (expected_offset != data_size) {
        throw CorruptionError(origin + ": " + std::to_string(data_size - expected_offset) +
                              " trailing bytes after the last tensor");
    }
    return ckpt;
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read checkpoint: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes, path);
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const auto bytes = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
    if (!out) throw DataError("write failed: " + path);
}

} // namespace ecomlm::ckpt
