#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nnc/types.hpp"

namespace nnc {

// Row-major 2D block of coefficients or samples. Sides are capped at 64;
// real inputs are the filter's own spatial size (<= 16 or so) or 8x8.
struct Block {
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<float> data;

    bool operator==(const Block&) const = default;
};

// Bookkeeping for one-dimensionalized weights chunked into 8x8 blocks:
// the tail block is zero-padded to 64 and pad_len records how much.
struct BlockArrangement {
    uint64_t original_len = 0;
    uint32_t block_rows = 8;
    uint32_t block_cols = 8;
    uint32_t pad_len = 0;  // == (64 - original_len % 64) % 64

    bool operator==(const BlockArrangement&) const = default;
};

// Orthonormal DCT-II of the block, same dimensions. Separable: D * X * D^T
// where D is the orthonormal cosine basis for each side. Energy-preserving,
// so quantization error in the coefficient domain equals signal-domain error.
Block dct2_forward(const Block& block);

// Exact inverse (D^T * Y * D) up to float tolerance.
Block dct2_inverse(const Block& coeffs);

// Splits a ConvKernel(h, w, c_in, c_out) tensor into c_in*c_out spatial
// h x w blocks, c_out-major then c_in. The tensor layout is row-major over
// (h, w, c_in, c_out). Throws WrongKind for non-spatial kinds.
std::vector<Block> kernel_blocks(const ParamKind& kind, const TensorF32& tensor);

// Inverse of kernel_blocks; blocks must arrive in the same order/shape.
TensorF32 reassemble_kernel(const ParamKind& kind, const std::vector<Block>& blocks);

// Chunks a flat weight vector row-major into consecutive 8x8 blocks,
// zero-padding the final partial block. Throws EmptyInput on length 0.
std::pair<std::vector<Block>, BlockArrangement> vector_blocks(std::span<const float> values);

// Inverse of vector_blocks: concatenates block contents and drops padding.
// Throws ArrangementMismatch if the metadata disagrees with the blocks.
std::vector<float> unvector_blocks(const std::vector<Block>& blocks,
                                   const BlockArrangement& arrangement);

}  // namespace nnc
