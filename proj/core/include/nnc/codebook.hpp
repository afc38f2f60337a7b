#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nnc/quantizer.hpp"

namespace nnc {

// Explicit list of centroid values signaled in the bit stream; data is
// stored as indices into it. Always 2^bits entries.
struct CodeBook {
    std::vector<float> centroids;

    bool operator==(const CodeBook&) const = default;
};

struct ClusterResult {
    CodeBook codebook;
    std::vector<uint32_t> indices;  // one per input value, < centroids.size()
    float distortion = 0.0f;        // sum of squared errors
};

// One multi-step Lloyd descent from the given initial centroids: assign to
// nearest centroid (ties to the lowest centroid index), recompute centroids
// as cluster means, reseed empty clusters with the point farthest from its
// centroid. Stops early once assignments are stable. If step_distortions is
// non-null it receives the distortion after every step (non-increasing).
ClusterResult lloyd_run(std::span<const float> values, std::vector<float> centroids,
                        int steps, std::vector<double>* step_distortions = nullptr);

// Code book search for biases/normalizations: ten random initializations
// (distinct values sampled without replacement, deterministic in `seed` and
// the initialization number) plus one initialization from the uniform
// quantizer grid, 50 Lloyd steps each, keep the smallest distortion. The
// uniform-grid candidate guarantees the result never loses to uniform
// quantization at the same level count. Accepts bits in [1, 16]; the codec
// itself stays within [2, 16].
ClusterResult kmeans_encode(std::span<const float> values, const QuantizerConfig& cfg,
                            uint64_t seed);

// Pure table lookup; decode cost is independent of how the book was built.
std::vector<float> codebook_decode(std::span<const uint32_t> indices, const CodeBook& book);

// Per-layer clustering seed: FNV-1a of the layer name, XORed with the
// global seed. Keeps layer-parallel encoding reproducible.
uint64_t layer_seed(std::string_view layer_name, uint64_t global_seed);

}  // namespace nnc
