#include "nnc/bitstream.hpp"

#include <cmath>
#include <cstring>
#include <unordered_set>

#include "byteio.hpp"

namespace nnc {
namespace {

constexpr char kMagic[4] = {'N', 'N', 'C', '1'};
constexpr uint8_t kVersion = 1;

bool needs_arrangement(const EncodedLayer& layer) {
    return layer.method == LayerMethod::TransformQuant &&
           (layer.kind.tag == ParamKindTag::DenseMatrix ||
            layer.kind.tag == ParamKindTag::Conv1x1);
}

void check_finite_field(float v, const char* what) {
    if (!std::isfinite(v)) fail(Err::MalformedRecord, std::string(what) + " is not finite");
}

}  // namespace

std::vector<uint8_t> pack_indices(std::span<const uint32_t> indices, int bits) {
    if (bits < 1 || bits > 16) fail(Err::BadConfig, "pack_indices: bits must be in [1, 16]");
    const uint32_t limit = 1u << bits;
    std::vector<uint8_t> out;
    out.reserve(indices.size() * (bits <= 8 ? 1 : 2));
    for (uint32_t idx : indices) {
        if (idx >= limit)
            fail(Err::IndexOutOfRange, "pack_indices: index " + std::to_string(idx) +
                                           " needs more than " + std::to_string(bits) + " bits");
        out.push_back(static_cast<uint8_t>(idx & 0xff));
        if (bits > 8) out.push_back(static_cast<uint8_t>(idx >> 8));
    }
    return out;
}

std::vector<uint32_t> unpack_indices(std::span<const uint8_t> bytes, size_t count, int bits) {
    if (bits < 1 || bits > 16) fail(Err::BadConfig, "unpack_indices: bits must be in [1, 16]");
    const size_t width = bits <= 8 ? 1 : 2;
    if (bytes.size() != count * width)
        fail(Err::PayloadLengthMismatch, "unpack_indices: got " + std::to_string(bytes.size()) +
                                             " bytes, expected " + std::to_string(count * width));
    const uint32_t limit = 1u << bits;
    std::vector<uint32_t> out(count);
    for (size_t i = 0; i < count; ++i) {
        uint32_t v = bytes[i * width];
        if (width == 2) v |= static_cast<uint32_t>(bytes[i * width + 1]) << 8;
        if (v >= limit)
            fail(Err::IndexOutOfRange, "unpack_indices: index " + std::to_string(v) +
                                           " out of range for " + std::to_string(bits) + " bits");
        out[i] = v;
    }
    return out;
}

std::vector<uint8_t> write_compressed(const CompressedModel& model) {
    validate_config(model.cfg);
    if (model.layers.empty()) fail(Err::InvalidModel, "compressed model has no layers");

    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    detail::put_u8(out, kVersion);
    detail::put_u8(out, static_cast<uint8_t>(model.cfg.bits));
    detail::put_u8(out, static_cast<uint8_t>(model.method_set));
    detail::put_u32(out, static_cast<uint32_t>(model.layers.size()));

    for (const EncodedLayer& layer : model.layers) {
        if (layer.name.empty() || layer.name.size() > 0xffff)
            fail(Err::InvalidModel, "bad layer name length");
        detail::put_u16(out, static_cast<uint16_t>(layer.name.size()));
        out.insert(out.end(), layer.name.begin(), layer.name.end());

        if (layer.kind.dims.size() != kind_dim_count(layer.kind.tag))
            fail(Err::InvalidModel, "kind dims mismatch for layer '" + layer.name + "'");
        detail::put_u8(out, static_cast<uint8_t>(layer.kind.tag));
        for (uint32_t d : layer.kind.dims) detail::put_u32(out, d);

        detail::put_u8(out, static_cast<uint8_t>(layer.method));
        detail::put_f32(out, layer.prescale_factor);

        switch (layer.method) {
            case LayerMethod::TransformQuant:
            case LayerMethod::DirectQuant:
                detail::put_f32(out, layer.grid.offset);
                detail::put_f32(out, layer.grid.step);
                if (needs_arrangement(layer)) {
                    if (!layer.arrangement)
                        fail(Err::InvalidModel, "missing block arrangement for '" + layer.name + "'");
                    detail::put_u8(out, static_cast<uint8_t>(layer.arrangement->pad_len));
                    detail::put_u64(out, layer.arrangement->original_len);
                }
                break;
            case LayerMethod::CodeBookMethod:
                if (layer.codebook.centroids.size() != model.cfg.levels())
                    fail(Err::InvalidModel, "code book size mismatch for '" + layer.name + "'");
                for (float c : layer.codebook.centroids) detail::put_f32(out, c);
                break;
            case LayerMethod::Raw:
                break;
        }

        detail::put_u32(out, static_cast<uint32_t>(layer.payload.size()));
        detail::put_bytes(out, layer.payload);
    }

    detail::put_u64(out, model.arch_meta.size());
    detail::put_bytes(out, model.arch_meta);
    return out;
}

CompressedModel read_compressed(std::span<const uint8_t> bytes) {
    detail::ByteReader r(bytes, Err::TruncatedRecord);
    if (r.remaining() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        fail(Err::BadMagic, "not an NNC1 container");
    r.bytes(4);

    CompressedModel model;
    model.version = r.u8();
    if (model.version != kVersion)
        fail(Err::UnsupportedVersion, "NNC version " + std::to_string(model.version));
    uint8_t bits = r.u8();
    if (bits < 2 || bits > 16) fail(Err::MalformedRecord, "bits out of range");
    model.cfg.bits = bits;
    uint8_t mset = r.u8();
    if (mset > 2) fail(Err::MalformedRecord, "unknown method set");
    model.method_set = static_cast<MethodSet>(mset);

    uint32_t layer_count = r.u32();
    if (layer_count == 0) fail(Err::MalformedRecord, "zero layers");
    // each record is at least name_len + kind + method + factor + payload_len
    if (layer_count > r.remaining() / 12)
        fail(Err::TruncatedRecord, "layer count exceeds file size");

    std::unordered_set<std::string> names;
    model.layers.reserve(layer_count);
    for (uint32_t li = 0; li < layer_count; ++li) {
        EncodedLayer layer;
        uint16_t name_len = r.u16();
        if (name_len == 0) fail(Err::MalformedRecord, "empty layer name");
        auto name_bytes = r.bytes(name_len);
        layer.name.assign(name_bytes.begin(), name_bytes.end());
        if (!names.insert(layer.name).second)
            fail(Err::MalformedRecord, "duplicate layer name '" + layer.name + "'");

        uint8_t tag = r.u8();
        if (tag > 4) fail(Err::MalformedRecord, "unknown kind tag");
        layer.kind.tag = static_cast<ParamKindTag>(tag);
        uint64_t elems = 1;
        for (size_t d = 0; d < kind_dim_count(layer.kind.tag); ++d) {
            uint32_t v = r.u32();
            if (v == 0) fail(Err::MalformedRecord, "zero dimension");
            layer.kind.dims.push_back(v);
            elems *= v;
            if (elems > (1ULL << 31)) fail(Err::MalformedRecord, "tensor too large");
        }
        if (layer.kind.tag == ParamKindTag::ConvKernel && layer.kind.dims[0] <= 1 &&
            layer.kind.dims[1] <= 1)
            fail(Err::MalformedRecord, "conv kernel without spatial extent");

        uint8_t method = r.u8();
        if (method > 3) fail(Err::MalformedRecord, "unknown layer method");
        layer.method = static_cast<LayerMethod>(method);

        layer.prescale_factor = r.f32();
        check_finite_field(layer.prescale_factor, "prescale factor");
        if (layer.prescale_factor <= 0.0f)
            fail(Err::MalformedRecord, "prescale factor must be positive");

        switch (layer.method) {
            case LayerMethod::TransformQuant:
            case LayerMethod::DirectQuant: {
                layer.grid.offset = r.f32();
                layer.grid.step = r.f32();
                check_finite_field(layer.grid.offset, "grid offset");
                check_finite_field(layer.grid.step, "grid step");
                if (layer.grid.step < 0.0f) fail(Err::MalformedRecord, "negative grid step");
                if (needs_arrangement(layer)) {
                    BlockArrangement arr;
                    arr.pad_len = r.u8();
                    arr.original_len = r.u64();
                    if (arr.original_len != elems)
                        fail(Err::ArrangementMismatch, "original_len disagrees with dims");
                    if (arr.pad_len != (64 - arr.original_len % 64) % 64)
                        fail(Err::ArrangementMismatch, "pad_len disagrees with original_len");
                    layer.arrangement = arr;
                }
                break;
            }
            case LayerMethod::CodeBookMethod: {
                layer.codebook.centroids.resize(model.cfg.levels());
                for (float& c : layer.codebook.centroids) {
                    c = r.f32();
                    check_finite_field(c, "centroid");
                }
                break;
            }
            case LayerMethod::Raw:
                break;
        }

        uint32_t payload_len = r.u32();
        if (payload_len > r.remaining())
            fail(Err::TruncatedRecord, "payload length exceeds remaining bytes");
        auto payload = r.bytes(payload_len);
        layer.payload.assign(payload.begin(), payload.end());
        model.layers.push_back(std::move(layer));
    }

    uint64_t arch_len = r.u64();
    if (arch_len != r.remaining())
        fail(arch_len > r.remaining() ? Err::TruncatedRecord : Err::MalformedRecord,
             "arch_meta length disagrees with file size");
    auto arch = r.bytes(arch_len);
    model.arch_meta.assign(arch.begin(), arch.end());
    return model;
}

}  // namespace nnc
