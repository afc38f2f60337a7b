#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnc/error.hpp"

namespace nnc {

// Flat row-major float32 tensor. Shape dimensions are all positive and
// product(shape) == values.size(); values must be finite.
struct TensorF32 {
    std::vector<uint32_t> shape;
    std::vector<float> values;

    size_t element_count() const {
        size_t n = 1;
        for (uint32_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    bool operator==(const TensorF32&) const = default;
};

enum class ParamKindTag : uint8_t {
    ConvKernel = 0,           // h, w, c_in, c_out with h > 1 or w > 1
    Conv1x1 = 1,              // c_in, c_out
    DenseMatrix = 2,          // rows, cols
    BiasVector = 3,           // len
    NormalizationVector = 4,  // len
};

// What a parameter tensor *is*, which selects its coding route: spatial
// kernels get a per-slice DCT, dense/1x1 weights get 8x8 block arrangement,
// biases and normalizations get code books.
struct ParamKind {
    ParamKindTag tag = ParamKindTag::BiasVector;
    std::vector<uint32_t> dims;

    static ParamKind conv_kernel(uint32_t h, uint32_t w, uint32_t c_in, uint32_t c_out) {
        return {ParamKindTag::ConvKernel, {h, w, c_in, c_out}};
    }
    static ParamKind conv1x1(uint32_t c_in, uint32_t c_out) {
        return {ParamKindTag::Conv1x1, {c_in, c_out}};
    }
    static ParamKind dense(uint32_t rows, uint32_t cols) {
        return {ParamKindTag::DenseMatrix, {rows, cols}};
    }
    static ParamKind bias(uint32_t len) { return {ParamKindTag::BiasVector, {len}}; }
    static ParamKind normalization(uint32_t len) {
        return {ParamKindTag::NormalizationVector, {len}};
    }

    size_t element_count() const {
        size_t n = 1;
        for (uint32_t d : dims) n *= d;
        return dims.empty() ? 0 : n;
    }

    bool operator==(const ParamKind&) const = default;
};

// Expected number of dims for a kind tag (conv: 4, matrix-like: 2, vector: 1).
size_t kind_dim_count(ParamKindTag tag);

struct LayerParams {
    std::string name;
    ParamKind kind;
    TensorF32 tensor;

    bool operator==(const LayerParams&) const = default;
};

// The codec's input and the decoder's output: an ordered list of named
// parameter tensors plus an opaque architecture blob that rides along
// unmodified through encode/decode.
struct NetworkModel {
    std::vector<LayerParams> layers;
    std::vector<uint8_t> arch_meta;

    bool operator==(const NetworkModel&) const = default;
};

// Throws CodecError if any structural invariant is violated: empty layer
// list, duplicate or empty names, non-positive dims, kind/tensor length
// mismatch, ConvKernel with h == w == 1, or non-finite values.
void validate_model(const NetworkModel& model);

}  // namespace nnc
