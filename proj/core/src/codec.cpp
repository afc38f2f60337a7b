#include "nnc/codec.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <thread>

#include "nnc/codebook.hpp"
#include "nnc/model_io.hpp"
#include "nnc/prescale.hpp"
#include "nnc/quantizer.hpp"
#include "nnc/transform.hpp"

namespace nnc {
namespace {

bool is_weight_kind(ParamKindTag tag) {
    return tag == ParamKindTag::ConvKernel || tag == ParamKindTag::Conv1x1 ||
           tag == ParamKindTag::DenseMatrix;
}

std::vector<uint8_t> floats_to_bytes(std::span<const float> values) {
    std::vector<uint8_t> out;
    out.reserve(values.size() * 4);
    for (float v : values) {
        uint32_t u = std::bit_cast<uint32_t>(v);
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(u >> (8 * i)));
    }
    return out;
}

std::vector<float> bytes_to_floats(std::span<const uint8_t> bytes) {
    std::vector<float> out(bytes.size() / 4);
    for (size_t i = 0; i < out.size(); ++i) {
        uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<uint32_t>(bytes[i * 4 + b]) << (8 * b);
        out[i] = std::bit_cast<float>(u);
    }
    return out;
}

// Forward DCT over the layer's block decomposition, coefficients
// concatenated in block order.
std::vector<float> transform_coefficients(const LayerParams& layer,
                                          std::span<const float> scaled,
                                          std::optional<BlockArrangement>& arrangement) {
    std::vector<float> coeffs;
    coeffs.reserve(scaled.size());
    if (layer.kind.tag == ParamKindTag::ConvKernel) {
        TensorF32 scaled_tensor{layer.kind.dims, {scaled.begin(), scaled.end()}};
        for (const Block& b : kernel_blocks(layer.kind, scaled_tensor)) {
            Block c = dct2_forward(b);
            coeffs.insert(coeffs.end(), c.data.begin(), c.data.end());
        }
    } else {
        auto [blocks, arr] = vector_blocks(scaled);
        arrangement = arr;
        for (const Block& b : blocks) {
            Block c = dct2_forward(b);
            coeffs.insert(coeffs.end(), c.data.begin(), c.data.end());
        }
    }
    return coeffs;
}

std::vector<float> inverse_transform(const EncodedLayer& layer, std::span<const float> coeffs) {
    if (layer.kind.tag == ParamKindTag::ConvKernel) {
        const uint32_t h = layer.kind.dims[0], w = layer.kind.dims[1];
        const size_t per_block = static_cast<size_t>(h) * w;
        std::vector<Block> blocks;
        blocks.reserve(coeffs.size() / per_block);
        for (size_t pos = 0; pos < coeffs.size(); pos += per_block) {
            Block c{h, w, {coeffs.begin() + pos, coeffs.begin() + pos + per_block}};
            blocks.push_back(dct2_inverse(c));
        }
        return reassemble_kernel(layer.kind, blocks).values;
    }
    const BlockArrangement& arr = *layer.arrangement;
    std::vector<Block> blocks;
    blocks.reserve(coeffs.size() / 64);
    for (size_t pos = 0; pos < coeffs.size(); pos += 64) {
        Block c{8, 8, {coeffs.begin() + pos, coeffs.begin() + pos + 64}};
        blocks.push_back(dct2_inverse(c));
    }
    return unvector_blocks(blocks, arr);
}

}  // namespace

EncodedLayer encode_layer(const LayerParams& layer, const QuantizerConfig& cfg,
                          uint64_t global_seed, MethodSet method_set) {
    EncodedLayer out;
    out.name = layer.name;
    out.kind = layer.kind;

    const std::vector<float>& values = layer.tensor.values;
    if (values.size() < 2) {
        // quantization and clustering degenerate on single-value tensors
        out.method = LayerMethod::Raw;
        out.prescale_factor = 1.0f;
        out.payload = entropy_compress(floats_to_bytes(values));
        return out;
    }

    auto [scaled, factor] = prescale(values);
    out.prescale_factor = factor.factor;

    bool cluster = method_set == MethodSet::ClusterAll ||
                   (method_set == MethodSet::Full && !is_weight_kind(layer.kind.tag));
    if (cluster) {
        out.method = LayerMethod::CodeBookMethod;
        ClusterResult r = kmeans_encode(scaled, cfg, layer_seed(layer.name, global_seed));
        out.codebook = std::move(r.codebook);
        out.payload = entropy_compress(pack_indices(r.indices, cfg.bits));
        return out;
    }

    if (method_set == MethodSet::Full) {
        out.method = LayerMethod::TransformQuant;
        std::vector<float> coeffs = transform_coefficients(layer, scaled, out.arrangement);
        auto [indices, grid] = quantize(coeffs, cfg);
        out.grid = grid;
        out.payload = entropy_compress(pack_indices(indices, cfg.bits));
        return out;
    }

    out.method = LayerMethod::DirectQuant;
    auto [indices, grid] = quantize(scaled, cfg);
    out.grid = grid;
    out.payload = entropy_compress(pack_indices(indices, cfg.bits));
    return out;
}

TensorF32 decode_layer(const EncodedLayer& layer, const QuantizerConfig& cfg) {
    const size_t elems = layer.kind.element_count();

    TensorF32 tensor;
    tensor.shape = layer.kind.dims;

    if (layer.method == LayerMethod::Raw) {
        std::vector<uint8_t> raw = entropy_decompress(layer.payload, elems * 4);
        if (raw.size() != elems * 4)
            fail(Err::PayloadLengthMismatch, "layer '" + layer.name + "': raw payload size");
        tensor.values = bytes_to_floats(raw);
    } else {
        size_t count = elems;
        if (layer.method == LayerMethod::TransformQuant && layer.arrangement)
            count = elems + layer.arrangement->pad_len;

        const size_t width = cfg.bits <= 8 ? 1 : 2;
        std::vector<uint8_t> packed = entropy_decompress(layer.payload, count * width);
        std::vector<uint32_t> indices = unpack_indices(packed, count, cfg.bits);

        std::vector<float> scaled;
        switch (layer.method) {
            case LayerMethod::TransformQuant: {
                std::vector<float> coeffs = dequantize(indices, layer.grid, cfg);
                scaled = inverse_transform(layer, coeffs);
                break;
            }
            case LayerMethod::DirectQuant:
                scaled = dequantize(indices, layer.grid, cfg);
                break;
            case LayerMethod::CodeBookMethod:
                scaled = codebook_decode(indices, layer.codebook);
                break;
            case LayerMethod::Raw:
                break;
        }
        if (scaled.size() != elems)
            fail(Err::PayloadLengthMismatch, "layer '" + layer.name + "': reconstructed size");
        tensor.values = unprescale(scaled, PrescaleFactor{layer.prescale_factor});
    }

    for (float v : tensor.values)
        if (!std::isfinite(v))
            fail(Err::NonFiniteValue, "layer '" + layer.name + "': non-finite reconstruction");
    return tensor;
}

CompressedModel encode_network(const NetworkModel& model, const QuantizerConfig& cfg,
                               uint64_t seed, MethodSet method_set, unsigned workers) {
    validate_model(model);
    validate_config(cfg);

    CompressedModel out;
    out.cfg = cfg;
    out.method_set = method_set;
    out.arch_meta = model.arch_meta;
    out.layers.resize(model.layers.size());

    auto encode_one = [&](size_t i) {
        try {
            out.layers[i] = encode_layer(model.layers[i], cfg, seed, method_set);
        } catch (const CodecError& e) {
            throw CodecError(e.code(),
                             "layer '" + model.layers[i].name + "': " + e.what());
        }
    };

    if (workers <= 1 || model.layers.size() <= 1) {
        for (size_t i = 0; i < model.layers.size(); ++i) encode_one(i);
        return out;
    }

    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            size_t i = next.fetch_add(1);
            if (i >= model.layers.size()) break;
            try {
                encode_one(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::thread> pool;
    unsigned n = std::min<size_t>(workers, model.layers.size());
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

NetworkModel decode_network(const CompressedModel& compressed) {
    NetworkModel model;
    model.arch_meta = compressed.arch_meta;
    model.layers.reserve(compressed.layers.size());
    for (const EncodedLayer& layer : compressed.layers) {
        LayerParams p;
        p.name = layer.name;
        p.kind = layer.kind;
        p.tensor = decode_layer(layer, compressed.cfg);
        model.layers.push_back(std::move(p));
    }
    return model;
}

double compression_factor(uint64_t original_bytes, uint64_t compressed_bytes) {
    if (compressed_bytes == 0) fail(Err::ZeroCompressedSize, "compressed size is zero");
    return static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes);
}

}  // namespace nnc
