#include "nnc/model_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <string_view>
#include <unordered_set>

#include "byteio.hpp"

namespace nnc {
namespace {

constexpr char kMagic[4] = {'N', 'N', 'M', '1'};

std::string escape_name(std::string_view name) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(name.size());
    for (unsigned char c : name) {
        if (c <= 0x20 || c == 0x7f || c == '%') {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xf];
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::string unescape_name(std::string_view escaped) {
    std::string out;
    for (size_t i = 0; i < escaped.size(); ++i) {
        if (escaped[i] == '%') {
            if (i + 2 >= escaped.size()) fail(Err::MalformedHeader, "bad name escape");
            int hi = hex_val(escaped[i + 1]), lo = hex_val(escaped[i + 2]);
            if (hi < 0 || lo < 0) fail(Err::MalformedHeader, "bad name escape");
            out += static_cast<char>(hi * 16 + lo);
            i += 2;
        } else {
            out += escaped[i];
        }
    }
    return out;
}

const char* kind_word(ParamKindTag tag) {
    switch (tag) {
        case ParamKindTag::ConvKernel: return "conv";
        case ParamKindTag::Conv1x1: return "conv1x1";
        case ParamKindTag::DenseMatrix: return "dense";
        case ParamKindTag::BiasVector: return "bias";
        case ParamKindTag::NormalizationVector: return "norm";
    }
    return "?";
}

// Tokenizer over one header line; numbers are plain decimal.
struct LineParser {
    std::string_view rest;

    std::string_view token() {
        if (rest.empty()) fail(Err::MalformedHeader, "missing token");
        size_t sp = rest.find(' ');
        std::string_view tok = rest.substr(0, sp);
        rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
        if (tok.empty()) fail(Err::MalformedHeader, "empty token");
        return tok;
    }

    uint64_t number() {
        std::string_view tok = token();
        uint64_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size())
            fail(Err::MalformedHeader, "bad number '" + std::string(tok) + "'");
        return v;
    }

    bool done() const { return rest.empty(); }
};

}  // namespace

std::vector<uint8_t> write_model(const NetworkModel& model) {
    validate_model(model);

    std::string header;
    header += "layers " + std::to_string(model.layers.size()) + "\n";
    header += "arch_meta " + std::to_string(model.arch_meta.size()) + "\n";

    uint64_t offset = 0;
    for (const LayerParams& layer : model.layers) {
        uint64_t byte_len = layer.tensor.values.size() * 4;
        header += "layer " + escape_name(layer.name) + " " + kind_word(layer.kind.tag);
        for (uint32_t d : layer.kind.dims) header += " " + std::to_string(d);
        std::string shape;
        for (size_t i = 0; i < layer.tensor.shape.size(); ++i)
            shape += (i ? "x" : "") + std::to_string(layer.tensor.shape[i]);
        header += " " + shape;
        header += " " + std::to_string(offset) + " " + std::to_string(byte_len) + "\n";
        offset += byte_len;
    }

    std::vector<uint8_t> out;
    out.reserve(16 + header.size() + offset + model.arch_meta.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    detail::put_u64(out, header.size());
    out.insert(out.end(), header.begin(), header.end());
    for (const LayerParams& layer : model.layers)
        for (float v : layer.tensor.values) detail::put_f32(out, v);
    detail::put_bytes(out, model.arch_meta);
    return out;
}

NetworkModel read_model(const std::vector<uint8_t>& bytes) {
    detail::ByteReader r(bytes, Err::TruncatedBlob);
    if (r.remaining() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        fail(Err::BadMagic, "not an NNM1 container");
    r.bytes(4);

    uint64_t header_len = r.u64();
    if (header_len > r.remaining()) fail(Err::MalformedHeader, "header length exceeds file");
    auto header_bytes = r.bytes(header_len);
    std::string_view header(reinterpret_cast<const char*>(header_bytes.data()), header_len);

    // split into lines, strict trailing '\n'
    std::vector<std::string_view> lines;
    while (!header.empty()) {
        size_t nl = header.find('\n');
        if (nl == std::string_view::npos) fail(Err::MalformedHeader, "unterminated header line");
        lines.push_back(header.substr(0, nl));
        header = header.substr(nl + 1);
    }
    if (lines.size() < 2) fail(Err::MalformedHeader, "header too short");

    LineParser first{lines[0]};
    if (first.token() != "layers") fail(Err::MalformedHeader, "expected 'layers'");
    uint64_t layer_count = first.number();
    if (!first.done()) fail(Err::MalformedHeader, "trailing tokens on layers line");

    LineParser second{lines[1]};
    if (second.token() != "arch_meta") fail(Err::MalformedHeader, "expected 'arch_meta'");
    uint64_t arch_len = second.number();
    if (!second.done()) fail(Err::MalformedHeader, "trailing tokens on arch_meta line");

    if (layer_count == 0) fail(Err::MalformedHeader, "model has no layers");
    if (lines.size() != 2 + layer_count) fail(Err::MalformedHeader, "layer line count mismatch");

    NetworkModel model;
    std::unordered_set<std::string> names;
    uint64_t expect_offset = 0;
    for (uint64_t i = 0; i < layer_count; ++i) {
        LineParser lp{lines[2 + i]};
        if (lp.token() != "layer") fail(Err::MalformedHeader, "expected 'layer'");

        LayerParams layer;
        layer.name = unescape_name(lp.token());
        if (layer.name.empty()) fail(Err::MalformedHeader, "empty layer name");
        if (!names.insert(layer.name).second)
            fail(Err::DuplicateLayerName, "duplicate layer name '" + layer.name + "'");

        std::string_view kw = lp.token();
        ParamKindTag tag;
        if (kw == "conv") tag = ParamKindTag::ConvKernel;
        else if (kw == "conv1x1") tag = ParamKindTag::Conv1x1;
        else if (kw == "dense") tag = ParamKindTag::DenseMatrix;
        else if (kw == "bias") tag = ParamKindTag::BiasVector;
        else if (kw == "norm") tag = ParamKindTag::NormalizationVector;
        else fail(Err::MalformedHeader, "unknown kind '" + std::string(kw) + "'");

        layer.kind.tag = tag;
        uint64_t kind_elems = 1;
        for (size_t d = 0; d < kind_dim_count(tag); ++d) {
            uint64_t v = lp.number();
            if (v == 0 || v > 0xffffffffULL) fail(Err::MalformedHeader, "bad dimension");
            layer.kind.dims.push_back(static_cast<uint32_t>(v));
            kind_elems *= v;
            if (kind_elems > (1ULL << 31)) fail(Err::MalformedHeader, "tensor too large");
        }
        if (tag == ParamKindTag::ConvKernel && layer.kind.dims[0] <= 1 && layer.kind.dims[1] <= 1)
            fail(Err::MalformedHeader, "conv kernel without spatial extent");

        std::string_view shape_tok = lp.token();
        uint64_t shape_elems = 1;
        while (!shape_tok.empty()) {
            size_t x = shape_tok.find('x');
            std::string_view num = shape_tok.substr(0, x);
            uint64_t v = 0;
            auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
            if (ec != std::errc{} || p != num.data() + num.size() || v == 0 || v > 0xffffffffULL)
                fail(Err::MalformedHeader, "bad shape");
            layer.tensor.shape.push_back(static_cast<uint32_t>(v));
            shape_elems *= v;
            if (shape_elems > (1ULL << 31)) fail(Err::MalformedHeader, "tensor too large");
            shape_tok = x == std::string_view::npos ? std::string_view{} : shape_tok.substr(x + 1);
        }
        if (shape_elems != kind_elems) fail(Err::MalformedHeader, "shape/kind size mismatch");

        uint64_t off = lp.number();
        uint64_t byte_len = lp.number();
        if (!lp.done()) fail(Err::MalformedHeader, "trailing tokens on layer line");
        if (off != expect_offset) fail(Err::MalformedHeader, "non-contiguous blob offset");
        if (byte_len != kind_elems * 4) fail(Err::MalformedHeader, "blob length mismatch");
        expect_offset += byte_len;

        model.layers.push_back(std::move(layer));
    }

    // blobs
    if (r.remaining() < expect_offset + arch_len)
        fail(Err::TruncatedBlob, "file shorter than blobs + arch_meta");
    if (r.remaining() > expect_offset + arch_len)
        fail(Err::MalformedHeader, "trailing bytes after arch_meta");
    for (LayerParams& layer : model.layers) {
        size_t n = layer.kind.element_count();
        auto blob = r.bytes(n * 4);
        layer.tensor.values.resize(n);
        for (size_t i = 0; i < n; ++i) {
            uint32_t u = 0;
            for (int b = 0; b < 4; ++b) u |= static_cast<uint32_t>(blob[i * 4 + b]) << (8 * b);
            float v = std::bit_cast<float>(u);
            if (!std::isfinite(v))
                fail(Err::NonFiniteValue, "layer '" + layer.name + "': NaN or Inf value");
            layer.tensor.values[i] = v;
        }
    }

    auto arch = r.bytes(arch_len);
    model.arch_meta.assign(arch.begin(), arch.end());
    return model;
}

}  // namespace nnc
