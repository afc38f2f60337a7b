#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nnc {

// Bit depth of the uniform quantizer; the clustering stage uses 2^bits
// centroids to match. The codec accepts 2..16.
struct QuantizerConfig {
    int bits = 6;

    uint32_t levels() const { return 1u << bits; }
};

void validate_config(const QuantizerConfig& cfg);

// Reconstruction grid: value(i) = offset + step * i. step == 0 only when
// all inputs were equal.
struct QuantGrid {
    float offset = 0.0f;
    float step = 0.0f;

    bool operator==(const QuantGrid&) const = default;
};

// Uniform scalar quantization with one step size for every coefficient:
// offset = min(values), step = (max - min) / (2^bits - 1),
// index = round((v - offset) / step), half away from zero, clamped.
// Throws EmptyInput / NonFiniteInput.
std::pair<std::vector<uint32_t>, QuantGrid> quantize(std::span<const float> values,
                                                     const QuantizerConfig& cfg);

// output[i] = offset + step * indices[i]. Throws IndexOutOfRange if an
// index is >= 2^bits.
std::vector<float> dequantize(std::span<const uint32_t> indices, const QuantGrid& grid,
                              const QuantizerConfig& cfg);

}  // namespace nnc
