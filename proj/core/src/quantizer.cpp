#include "nnc/quantizer.hpp"

#include <algorithm>
#include <cmath>

#include "nnc/error.hpp"

namespace nnc {

void validate_config(const QuantizerConfig& cfg) {
    if (cfg.bits < 2 || cfg.bits > 16)
        fail(Err::BadConfig, "quantizer bits must be in [2, 16], got " + std::to_string(cfg.bits));
}

std::pair<std::vector<uint32_t>, QuantGrid> quantize(std::span<const float> values,
                                                     const QuantizerConfig& cfg) {
    validate_config(cfg);
    if (values.empty()) fail(Err::EmptyInput, "quantize: empty input");

    float lo = values[0], hi = values[0];
    for (float v : values) {
        if (!std::isfinite(v)) fail(Err::NonFiniteInput, "quantize: NaN or Inf");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    QuantGrid grid;
    grid.offset = lo;
    grid.step = hi == lo ? 0.0f : (hi - lo) / static_cast<float>(cfg.levels() - 1);

    std::vector<uint32_t> indices(values.size(), 0);
    if (grid.step > 0.0f) {
        const double step = grid.step;
        const double offset = grid.offset;
        const int64_t max_index = static_cast<int64_t>(cfg.levels()) - 1;
        for (size_t i = 0; i < values.size(); ++i) {
            // llround = round half away from zero, fixed across platforms
            int64_t idx = std::llround((static_cast<double>(values[i]) - offset) / step);
            indices[i] = static_cast<uint32_t>(std::clamp<int64_t>(idx, 0, max_index));
        }
    }
    return {std::move(indices), grid};
}

std::vector<float> dequantize(std::span<const uint32_t> indices, const QuantGrid& grid,
                              const QuantizerConfig& cfg) {
    validate_config(cfg);
    std::vector<float> out(indices.size());
    const double offset = grid.offset;
    const double step = grid.step;
    for (size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= cfg.levels())
            fail(Err::IndexOutOfRange, "dequantize: index " + std::to_string(indices[i]) +
                                           " >= " + std::to_string(cfg.levels()));
        out[i] = static_cast<float>(offset + step * indices[i]);
    }
    return out;
}

}  // namespace nnc
