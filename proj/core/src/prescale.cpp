#include "nnc/prescale.hpp"

#include <cmath>

#include "nnc/error.hpp"

namespace nnc {

std::pair<std::vector<float>, PrescaleFactor> prescale(std::span<const float> values) {
    float max_abs = 0.0f;
    for (float v : values) {
        if (!std::isfinite(v)) fail(Err::NonFiniteInput, "prescale: NaN or Inf");
        max_abs = std::max(max_abs, std::fabs(v));
    }

    PrescaleFactor f{max_abs > 0.0f ? max_abs : 1.0f};
    std::vector<float> scaled(values.begin(), values.end());
    if (f.factor != 1.0f)
        for (float& v : scaled) v /= f.factor;
    return {std::move(scaled), f};
}

std::vector<float> unprescale(std::span<const float> scaled, PrescaleFactor factor) {
    std::vector<float> out(scaled.begin(), scaled.end());
    if (factor.factor != 1.0f)
        for (float& v : out) v *= factor.factor;
    return out;
}

}  // namespace nnc
