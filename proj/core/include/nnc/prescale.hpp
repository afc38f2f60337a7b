#pragma once

#include <span>
#include <vector>

namespace nnc {

// Divisor applied to a tensor before coding so the values span the full
// [-1, 1] range. 1.0 for all-zero tensors.
struct PrescaleFactor {
    float factor = 1.0f;
};

// scaled[i] = values[i] / factor with factor = max |values|, so the largest
// magnitude maps to exactly +/-1.0. Throws NonFiniteInput on NaN/Inf.
std::pair<std::vector<float>, PrescaleFactor> prescale(std::span<const float> values);

// output[i] = scaled[i] * factor. Inverse of prescale up to one float
// rounding step per element.
std::vector<float> unprescale(std::span<const float> scaled, PrescaleFactor factor);

}  // namespace nnc
