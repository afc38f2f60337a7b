#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nnc/bz2.hpp"
#include "nnc/codebook.hpp"
#include "nnc/quantizer.hpp"
#include "nnc/transform.hpp"
#include "nnc/types.hpp"

namespace nnc {

// How one layer was coded. TransformQuant means DCT + uniform quantization
// (the kind decides kernel blocks vs 8x8 vector blocks); DirectQuant is
// uniform quantization without a transform; CodeBookMethod is clustering;
// Raw stores the float bytes for degenerate single-value tensors.
enum class LayerMethod : uint8_t {
    TransformQuant = 0,
    CodeBookMethod = 1,
    Raw = 2,
    DirectQuant = 3,
};

enum class MethodSet : uint8_t {
    Full = 0,      // DCT+quant for weights, code books for biases/normalizations
    QuantOnly = 1, // uniform quantization for everything
    ClusterAll = 2 // code books for everything
};

// One compressed layer record: decode metadata plus the BZip2 payload of
// the packed index stream (or raw floats for Raw).
struct EncodedLayer {
    std::string name;
    ParamKind kind;
    LayerMethod method = LayerMethod::Raw;
    float prescale_factor = 1.0f;
    QuantGrid grid;                               // TransformQuant / DirectQuant
    CodeBook codebook;                            // CodeBookMethod
    std::optional<BlockArrangement> arrangement;  // TransformQuant on dense/1x1 only
    std::vector<uint8_t> payload;
};

// NNC v1, the compressed container. All integers little-endian.
//
//   "NNC1"  u8 version=1  u8 bits  u8 method_set  u32 layer_count
//   per layer:
//     u16 name_len, name bytes
//     u8 kind_tag, u32 dims[...]        (conv: 4, conv1x1/dense: 2, vector: 1)
//     u8 method_tag
//     f32 prescale_factor
//     TransformQuant: f32 offset, f32 step [, u8 pad_len, u64 original_len
//                     for dense/1x1 block arrangements]
//     DirectQuant:    f32 offset, f32 step
//     CodeBookMethod: f32 centroids[2^bits]
//     Raw:            (nothing)
//     u32 payload_len, payload bytes    (a standalone BZip2 stream)
//   u64 arch_meta_len, arch_meta bytes
//
// Everything is byte-aligned by construction. Reads are fully validated:
// corrupt input yields typed errors, never crashes.
struct CompressedModel {
    uint8_t version = 1;
    QuantizerConfig cfg;
    MethodSet method_set = MethodSet::Full;
    std::vector<EncodedLayer> layers;
    std::vector<uint8_t> arch_meta;
};

// Whole-byte index packing applied before entropy coding: one byte per
// index for bits <= 8, two little-endian bytes otherwise. Byte-aligned
// symbols keep the BWT/MTF statistics intact.
std::vector<uint8_t> pack_indices(std::span<const uint32_t> indices, int bits);
std::vector<uint32_t> unpack_indices(std::span<const uint8_t> bytes, size_t count, int bits);

// Layer-wise entropy coding (standard BZip2 streams).
inline std::vector<uint8_t> entropy_compress(std::span<const uint8_t> bytes) {
    return bz2::compress(bytes);
}
inline std::vector<uint8_t> entropy_decompress(
    std::span<const uint8_t> bytes, size_t max_output = std::numeric_limits<size_t>::max()) {
    return bz2::decompress(bytes, max_output);
}

std::vector<uint8_t> write_compressed(const CompressedModel& model);
CompressedModel read_compressed(std::span<const uint8_t> bytes);

}  // namespace nnc
