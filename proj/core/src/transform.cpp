#include "nnc/transform.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace nnc {
namespace {

constexpr uint32_t kMaxSide = 64;
constexpr uint32_t kVecBlock = 8;

void check_block(const Block& b) {
    if (b.rows == 0 || b.cols == 0 || b.rows > kMaxSide || b.cols > kMaxSide)
        fail(Err::BadConfig, "block sides must be in [1, 64]");
    if (b.data.size() != static_cast<size_t>(b.rows) * b.cols)
        fail(Err::BadConfig, "block data size mismatch");
}

// Orthonormal DCT-II basis for size n: row 0 is sqrt(1/n), row k is
// sqrt(2/n) * cos(pi * (2j+1) * k / (2n)). Cached per size and thread.
const std::vector<double>& basis(uint32_t n) {
    thread_local std::unordered_map<uint32_t, std::vector<double>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> d(static_cast<size_t>(n) * n);
    const double norm0 = std::sqrt(1.0 / n);
    const double norm = std::sqrt(2.0 / n);
    for (uint32_t k = 0; k < n; ++k)
        for (uint32_t j = 0; j < n; ++j)
            d[k * n + j] = (k == 0 ? norm0 : norm) *
                           std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
    return cache.emplace(n, std::move(d)).first->second;
}

// Y = A * X * B^T with A: r x r, B: c x c, X: r x c, double accumulation.
Block separable_apply(const Block& x, const std::vector<double>& a, const std::vector<double>& b,
                      bool transpose_a, bool transpose_b) {
    const uint32_t r = x.rows, c = x.cols;
    std::vector<double> tmp(static_cast<size_t>(r) * c, 0.0);
    for (uint32_t i = 0; i < r; ++i)
        for (uint32_t k = 0; k < r; ++k) {
            double av = transpose_a ? a[k * r + i] : a[i * r + k];
            if (av == 0.0) continue;
            for (uint32_t j = 0; j < c; ++j) tmp[i * c + j] += av * x.data[k * c + j];
        }

    Block y{r, c, std::vector<float>(static_cast<size_t>(r) * c)};
    for (uint32_t i = 0; i < r; ++i)
        for (uint32_t j = 0; j < c; ++j) {
            double acc = 0.0;
            for (uint32_t k = 0; k < c; ++k) {
                double bv = transpose_b ? b[k * c + j] : b[j * c + k];
                acc += tmp[i * c + k] * bv;
            }
            y.data[i * c + j] = static_cast<float>(acc);
        }
    return y;
}

}  // namespace

Block dct2_forward(const Block& block) {
    check_block(block);
    // Y = D_r * X * D_c^T
    return separable_apply(block, basis(block.rows), basis(block.cols), false, false);
}

Block dct2_inverse(const Block& coeffs) {
    check_block(coeffs);
    // X = D_r^T * Y * D_c
    return separable_apply(coeffs, basis(coeffs.rows), basis(coeffs.cols), true, true);
}

std::vector<Block> kernel_blocks(const ParamKind& kind, const TensorF32& tensor) {
    if (kind.tag != ParamKindTag::ConvKernel)
        fail(Err::WrongKind, "kernel_blocks needs a ConvKernel");
    const uint32_t h = kind.dims[0], w = kind.dims[1], c_in = kind.dims[2], c_out = kind.dims[3];
    if (tensor.values.size() != kind.element_count())
        fail(Err::WrongKind, "tensor size does not match kernel dims");

    // layout: value(i, j, ci, co) at ((i*w + j)*c_in + ci)*c_out + co
    std::vector<Block> blocks;
    blocks.reserve(static_cast<size_t>(c_in) * c_out);
    for (uint32_t co = 0; co < c_out; ++co)
        for (uint32_t ci = 0; ci < c_in; ++ci) {
            Block b{h, w, std::vector<float>(static_cast<size_t>(h) * w)};
            for (uint32_t i = 0; i < h; ++i)
                for (uint32_t j = 0; j < w; ++j)
                    b.data[i * w + j] =
                        tensor.values[((static_cast<size_t>(i) * w + j) * c_in + ci) * c_out + co];
            blocks.push_back(std::move(b));
        }
    return blocks;
}

TensorF32 reassemble_kernel(const ParamKind& kind, const std::vector<Block>& blocks) {
    if (kind.tag != ParamKindTag::ConvKernel)
        fail(Err::WrongKind, "reassemble_kernel needs a ConvKernel");
    const uint32_t h = kind.dims[0], w = kind.dims[1], c_in = kind.dims[2], c_out = kind.dims[3];
    if (blocks.size() != static_cast<size_t>(c_in) * c_out)
        fail(Err::ArrangementMismatch, "kernel block count mismatch");

    TensorF32 t;
    t.shape = kind.dims;
    t.values.resize(kind.element_count());
    for (uint32_t co = 0; co < c_out; ++co)
        for (uint32_t ci = 0; ci < c_in; ++ci) {
            const Block& b = blocks[static_cast<size_t>(co) * c_in + ci];
            if (b.rows != h || b.cols != w)
                fail(Err::ArrangementMismatch, "kernel block shape mismatch");
            for (uint32_t i = 0; i < h; ++i)
                for (uint32_t j = 0; j < w; ++j)
                    t.values[((static_cast<size_t>(i) * w + j) * c_in + ci) * c_out + co] =
                        b.data[i * w + j];
        }
    return t;
}

std::pair<std::vector<Block>, BlockArrangement> vector_blocks(std::span<const float> values) {
    if (values.empty()) fail(Err::EmptyInput, "vector_blocks: empty input");

    const size_t block_elems = static_cast<size_t>(kVecBlock) * kVecBlock;
    BlockArrangement arr;
    arr.original_len = values.size();
    arr.pad_len = static_cast<uint32_t>((block_elems - values.size() % block_elems) % block_elems);

    std::vector<Block> blocks;
    blocks.reserve((values.size() + block_elems - 1) / block_elems);
    for (size_t pos = 0; pos < values.size(); pos += block_elems) {
        Block b{kVecBlock, kVecBlock, std::vector<float>(block_elems, 0.0f)};
        size_t n = std::min(block_elems, values.size() - pos);
        for (size_t i = 0; i < n; ++i) b.data[i] = values[pos + i];
        blocks.push_back(std::move(b));
    }
    return {std::move(blocks), arr};
}

std::vector<float> unvector_blocks(const std::vector<Block>& blocks,
                                   const BlockArrangement& arrangement) {
    const size_t block_elems = static_cast<size_t>(kVecBlock) * kVecBlock;
    if (arrangement.block_rows != kVecBlock || arrangement.block_cols != kVecBlock)
        fail(Err::ArrangementMismatch, "unsupported block size");
    if (arrangement.pad_len != (block_elems - arrangement.original_len % block_elems) % block_elems)
        fail(Err::ArrangementMismatch, "pad_len inconsistent with original_len");
    if (blocks.size() * block_elems != arrangement.original_len + arrangement.pad_len)
        fail(Err::ArrangementMismatch, "block count inconsistent with original_len");

    std::vector<float> out;
    out.reserve(arrangement.original_len);
    for (const Block& b : blocks) {
        if (b.rows != kVecBlock || b.cols != kVecBlock)
            fail(Err::ArrangementMismatch, "vector block shape mismatch");
        for (float v : b.data) {
            if (out.size() == arrangement.original_len) break;
            out.push_back(v);
        }
    }
    return out;
}

}  // namespace nnc
