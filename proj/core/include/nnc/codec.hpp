#pragma once

#include <cstdint>

#include "nnc/bitstream.hpp"
#include "nnc/types.hpp"

namespace nnc {

// Full encode pipeline, per layer:
//   ConvKernel            -> prescale -> per-slice h x w DCT -> quantize -> pack -> BZip2
//   DenseMatrix / Conv1x1 -> prescale -> 8x8 vector blocks -> DCT -> quantize -> pack -> BZip2
//   Bias / Normalization  -> prescale -> k-means code book -> pack -> BZip2
// QuantOnly quantizes everything without a transform; ClusterAll builds a
// code book for everything. Tensors with fewer than two values fall back to
// Raw. workers > 1 encodes layers in parallel; the output is byte-identical
// regardless of the worker count.
CompressedModel encode_network(const NetworkModel& model, const QuantizerConfig& cfg,
                               uint64_t seed, MethodSet method_set, unsigned workers = 1);

// Lossy reconstruction with identical layer names, kinds and shapes.
NetworkModel decode_network(const CompressedModel& compressed);

// Encode one layer; exposed for tests and the inspect tool.
EncodedLayer encode_layer(const LayerParams& layer, const QuantizerConfig& cfg,
                          uint64_t global_seed, MethodSet method_set);
TensorF32 decode_layer(const EncodedLayer& layer, const QuantizerConfig& cfg);

// uncompressed size / compressed size. Throws ZeroCompressedSize.
double compression_factor(uint64_t original_bytes, uint64_t compressed_bytes);

}  // namespace nnc
