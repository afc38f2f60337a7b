#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nnc/types.hpp"

namespace nnc {

// Desk-scale forward-pass evaluator so accuracy deltas of compressed models
// can be measured. The layer graph is a linear chain described as text in
// the model's arch_meta:
//
//   toynet v1
//   input <channels> <height> <width>
//   conv <layer>      stride-1 convolution, zero same-padding, odd kernel
//   dense <layer>     matrix-vector product, flattens image input
//   bias <layer>      per-channel add on images, elementwise on vectors
//   scale <layer>     per-channel multiply (normalization vectors)
//   relu
//   pool2             2x2 max pooling, stride 2
//   softmax
//
// Ops referencing parameters name layers of the NetworkModel.

enum class ToyOpKind : uint8_t { Input, Conv, Dense, Bias, Scale, Relu, Pool2, Softmax };

struct ToyOp {
    ToyOpKind kind;
    std::string layer;  // parameter layer name, empty for parameterless ops
    uint32_t channels = 0, height = 0, width = 0;  // Input only
};

struct ToyGraph {
    std::vector<ToyOp> ops;
};

// Parses the chain out of model.arch_meta. Throws MalformedGraph /
// UnknownLayer / WrongKind on inconsistent descriptions.
ToyGraph parse_graph(const NetworkModel& model);

// Deterministic class scores for one input (row-major C*H*W floats).
std::vector<float> forward(const NetworkModel& model, const ToyGraph& graph,
                           std::span<const float> input);

// Labeled evaluation set. File format "NND v1", little-endian:
//   "NND1"  u32 sample_count  u32 channels  u32 height  u32 width
//   u32 class_count
//   f32 inputs [sample_count * C * H * W]
//   u16 labels [sample_count]
struct ToyDataset {
    uint32_t channels = 0, height = 0, width = 0;
    uint32_t class_count = 0;
    std::vector<std::vector<float>> inputs;
    std::vector<uint16_t> labels;
};

std::vector<uint8_t> write_dataset(const ToyDataset& ds);
ToyDataset read_dataset(std::span<const uint8_t> bytes);

// Fraction of samples whose true label ranks among the k best scores,
// ties broken in favour of the lower class index. Throws EmptyDataset.
double top_k_accuracy(const NetworkModel& model, const ToyDataset& ds, int k);

}  // namespace nnc
