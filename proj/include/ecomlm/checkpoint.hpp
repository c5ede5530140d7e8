#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecomlm/errors.hpp"

namespace ecomlm::ckpt {

// Container layout (little-endian, bit-exact):
//   bytes 0..7   magic "ECKPT\0\0\1" (version byte last)
//   bytes 8..15  u64 header length H
//   bytes 16..   UTF-8 JSON header: tensor name -> {dtype, shape, offset, len}
//                plus "__meta__" {producer, alpha?, parents?}; names sorted
//   data region  tensors contiguous in name order, offsets relative to the
//                region start, no padding
inline constexpr unsigned char kMagic[8] = {'E', 'C', 'K', 'P', 'T', 0, 0, 1};

struct FormatError : DataError {
    using DataError::DataError;
};
struct CorruptionError : DataError {
    using DataError::DataError;
};

enum class Dtype { F32, F16, BF16 };

const char* dtype_name(Dtype d);
std::optional<Dtype> dtype_from_name(const std::string& s);
size_t dtype_size(Dtype d);

struct Tensor {
    Dtype dtype = Dtype::F32;
    std::vector<int64_t> shape;
    std::vector<uint8_t> data; // raw little-endian element bytes

    int64_t element_count() const;
};

struct Meta {
    std::string producer;
    std::optional<double> alpha;
    std::vector<std::string> parents;
};

struct Checkpoint {
    std::map<std::string, Tensor> tensors; // name-sorted by construction
    Meta meta;

    // Structural content digest over names, dtypes, shapes and raw bytes.
    std::string digest() const;
};

Checkpoint read_checkpoint(const std::string& path);
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);

// In-memory canonical serialization (what write_checkpoint puts on disk).
std::vector<uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<uint8_t>& bytes, const std::string& origin);

// Element conversions, round-to-nearest-even.
uint16_t f32_to_f16(float f);
float f16_to_f32(uint16_t h);
uint16_t f32_to_bf16(float f);
float bf16_to_f32(uint16_t b);

} // namespace ecomlm::ckpt
