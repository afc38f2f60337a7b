#include "nnc/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "byteio.hpp"

namespace nnc {
namespace {

const LayerParams& find_layer(const NetworkModel& model, const std::string& name) {
    for (const LayerParams& l : model.layers)
        if (l.name == name) return l;
    fail(Err::UnknownLayer, "graph references unknown layer '" + name + "'");
}

// Activations flow either as an image (channels x height x width) or as a
// flat vector once a dense layer ran.
struct Activation {
    bool image = false;
    uint32_t c = 0, h = 0, w = 0;
    std::vector<float> data;

    size_t size() const { return data.size(); }
};

void require(bool cond, Err code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

}  // namespace

ToyGraph parse_graph(const NetworkModel& model) {
    std::string text(model.arch_meta.begin(), model.arch_meta.end());
    std::istringstream in(text);
    std::string line;

    ToyGraph graph;
    bool saw_magic = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (!saw_magic) {
            std::string version;
            ls >> version;
            require(word == "toynet" && version == "v1", Err::MalformedGraph,
                    "arch_meta does not start with 'toynet v1'");
            saw_magic = true;
            continue;
        }

        ToyOp op;
        if (word == "input") {
            op.kind = ToyOpKind::Input;
            if (!(ls >> op.channels >> op.height >> op.width) || op.channels == 0 ||
                op.height == 0 || op.width == 0)
                fail(Err::MalformedGraph, "bad input line");
        } else if (word == "conv" || word == "dense" || word == "bias" || word == "scale") {
            op.kind = word == "conv"    ? ToyOpKind::Conv
                      : word == "dense" ? ToyOpKind::Dense
                      : word == "bias"  ? ToyOpKind::Bias
                                        : ToyOpKind::Scale;
            if (!(ls >> op.layer)) fail(Err::MalformedGraph, word + " without a layer name");
        } else if (word == "relu") {
            op.kind = ToyOpKind::Relu;
        } else if (word == "pool2") {
            op.kind = ToyOpKind::Pool2;
        } else if (word == "softmax") {
            op.kind = ToyOpKind::Softmax;
        } else {
            fail(Err::MalformedGraph, "unknown op '" + word + "'");
        }
        std::string extra;
        if (ls >> extra) fail(Err::MalformedGraph, "trailing tokens on '" + word + "' line");
        graph.ops.push_back(std::move(op));
    }

    require(saw_magic, Err::MalformedGraph, "empty graph description");
    require(!graph.ops.empty() && graph.ops.front().kind == ToyOpKind::Input,
            Err::MalformedGraph, "graph must start with an input op");
    return graph;
}

std::vector<float> forward(const NetworkModel& model, const ToyGraph& graph,
                           std::span<const float> input) {
    Activation act;

    for (const ToyOp& op : graph.ops) {
        switch (op.kind) {
            case ToyOpKind::Input: {
                act.image = true;
                act.c = op.channels;
                act.h = op.height;
                act.w = op.width;
                require(input.size() == static_cast<size_t>(act.c) * act.h * act.w,
                        Err::ShapeMismatch, "input size does not match graph input shape");
                act.data.assign(input.begin(), input.end());
                break;
            }
            case ToyOpKind::Conv: {
                const LayerParams& p = find_layer(model, op.layer);
                require(p.kind.tag == ParamKindTag::ConvKernel, Err::WrongKind,
                        "conv op needs a ConvKernel layer");
                const uint32_t kh = p.kind.dims[0], kw = p.kind.dims[1];
                const uint32_t c_in = p.kind.dims[2], c_out = p.kind.dims[3];
                require(act.image && act.c == c_in, Err::ShapeMismatch,
                        "conv input channels mismatch at '" + op.layer + "'");
                require(kh % 2 == 1 && kw % 2 == 1, Err::ShapeMismatch,
                        "conv kernel must be odd-sized for same padding");

                // stride 1, zero same-padding; weight(i,j,ci,co) laid out
                // row-major over (kh, kw, c_in, c_out)
                const int ph = static_cast<int>(kh / 2), pw = static_cast<int>(kw / 2);
                Activation out;
                out.image = true;
                out.c = c_out;
                out.h = act.h;
                out.w = act.w;
                out.data.assign(static_cast<size_t>(c_out) * act.h * act.w, 0.0f);
                for (uint32_t co = 0; co < c_out; ++co)
                    for (uint32_t y = 0; y < act.h; ++y)
                        for (uint32_t x = 0; x < act.w; ++x) {
                            double acc = 0.0;
                            for (uint32_t ci = 0; ci < c_in; ++ci)
                                for (uint32_t i = 0; i < kh; ++i)
                                    for (uint32_t j = 0; j < kw; ++j) {
                                        int yy = static_cast<int>(y + i) - ph;
                                        int xx = static_cast<int>(x + j) - pw;
                                        if (yy < 0 || xx < 0 || yy >= static_cast<int>(act.h) ||
                                            xx >= static_cast<int>(act.w))
                                            continue;
                                        float a = act.data[(static_cast<size_t>(ci) * act.h + yy) *
                                                               act.w + xx];
                                        float wv = p.tensor.values[((static_cast<size_t>(i) * kw + j) *
                                                                        c_in + ci) * c_out + co];
                                        acc += static_cast<double>(a) * wv;
                                    }
                            out.data[(static_cast<size_t>(co) * act.h + y) * act.w + x] =
                                static_cast<float>(acc);
                        }
                act = std::move(out);
                break;
            }
            case ToyOpKind::Dense: {
                const LayerParams& p = find_layer(model, op.layer);
                require(p.kind.tag == ParamKindTag::DenseMatrix, Err::WrongKind,
                        "dense op needs a DenseMatrix layer");
                const uint32_t rows = p.kind.dims[0], cols = p.kind.dims[1];
                require(act.size() == cols, Err::ShapeMismatch,
                        "dense input length mismatch at '" + op.layer + "'");
                Activation out;
                out.image = false;
                out.data.resize(rows);
                for (uint32_t r = 0; r < rows; ++r) {
                    double acc = 0.0;
                    for (uint32_t c = 0; c < cols; ++c)
                        acc += static_cast<double>(p.tensor.values[static_cast<size_t>(r) * cols + c]) *
                               act.data[c];
                    out.data[r] = static_cast<float>(acc);
                }
                act = std::move(out);
                break;
            }
            case ToyOpKind::Bias:
            case ToyOpKind::Scale: {
                const LayerParams& p = find_layer(model, op.layer);
                ParamKindTag want = op.kind == ToyOpKind::Bias ? ParamKindTag::BiasVector
                                                               : ParamKindTag::NormalizationVector;
                require(p.kind.tag == want, Err::WrongKind,
                        op.kind == ToyOpKind::Bias ? "bias op needs a BiasVector layer"
                                                   : "scale op needs a NormalizationVector layer");
                const std::vector<float>& v = p.tensor.values;
                if (act.image) {
                    require(v.size() == act.c, Err::ShapeMismatch,
                            "per-channel vector length mismatch at '" + op.layer + "'");
                    size_t plane = static_cast<size_t>(act.h) * act.w;
                    for (uint32_t c = 0; c < act.c; ++c)
                        for (size_t i = 0; i < plane; ++i) {
                            float& x = act.data[c * plane + i];
                            x = op.kind == ToyOpKind::Bias ? x + v[c] : x * v[c];
                        }
                } else {
                    require(v.size() == act.size(), Err::ShapeMismatch,
                            "vector length mismatch at '" + op.layer + "'");
                    for (size_t i = 0; i < act.size(); ++i) {
                        float& x = act.data[i];
                        x = op.kind == ToyOpKind::Bias ? x + v[i] : x * v[i];
                    }
                }
                break;
            }
            case ToyOpKind::Relu: {
                for (float& x : act.data) x = std::max(0.0f, x);
                break;
            }
            case ToyOpKind::Pool2: {
                require(act.image, Err::ShapeMismatch, "pool2 needs an image activation");
                require(act.h % 2 == 0 && act.w % 2 == 0, Err::ShapeMismatch,
                        "pool2 needs even height and width");
                Activation out;
                out.image = true;
                out.c = act.c;
                out.h = act.h / 2;
                out.w = act.w / 2;
                out.data.resize(static_cast<size_t>(out.c) * out.h * out.w);
                for (uint32_t c = 0; c < act.c; ++c)
                    for (uint32_t y = 0; y < out.h; ++y)
                        for (uint32_t x = 0; x < out.w; ++x) {
                            auto at = [&](uint32_t yy, uint32_t xx) {
                                return act.data[(static_cast<size_t>(c) * act.h + yy) * act.w + xx];
                            };
                            float m = std::max(std::max(at(2 * y, 2 * x), at(2 * y, 2 * x + 1)),
                                               std::max(at(2 * y + 1, 2 * x), at(2 * y + 1, 2 * x + 1)));
                            out.data[(static_cast<size_t>(c) * out.h + y) * out.w + x] = m;
                        }
                act = std::move(out);
                break;
            }
            case ToyOpKind::Softmax: {
                require(!act.data.empty(), Err::ShapeMismatch, "softmax on empty activation");
                float peak = *std::max_element(act.data.begin(), act.data.end());
                double total = 0.0;
                std::vector<double> e(act.size());
                for (size_t i = 0; i < act.size(); ++i) {
                    e[i] = std::exp(static_cast<double>(act.data[i]) - peak);
                    total += e[i];
                }
                for (size_t i = 0; i < act.size(); ++i)
                    act.data[i] = static_cast<float>(e[i] / total);
                act.image = false;
                break;
            }
        }
    }
    return std::move(act.data);
}

std::vector<uint8_t> write_dataset(const ToyDataset& ds) {
    std::vector<uint8_t> out;
    out.insert(out.end(), {'N', 'N', 'D', '1'});
    detail::put_u32(out, static_cast<uint32_t>(ds.inputs.size()));
    detail::put_u32(out, ds.channels);
    detail::put_u32(out, ds.height);
    detail::put_u32(out, ds.width);
    detail::put_u32(out, ds.class_count);
    const size_t elems = static_cast<size_t>(ds.channels) * ds.height * ds.width;
    for (const auto& sample : ds.inputs) {
        if (sample.size() != elems) fail(Err::ShapeMismatch, "dataset sample size mismatch");
        for (float v : sample) detail::put_f32(out, v);
    }
    if (ds.labels.size() != ds.inputs.size())
        fail(Err::ShapeMismatch, "dataset label count mismatch");
    for (uint16_t l : ds.labels) detail::put_u16(out, l);
    return out;
}

ToyDataset read_dataset(std::span<const uint8_t> bytes) {
    detail::ByteReader r(bytes, Err::TruncatedRecord);
    auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), "NND1", 4) != 0) fail(Err::BadMagic, "not an NND1 dataset");

    ToyDataset ds;
    uint32_t count = r.u32();
    ds.channels = r.u32();
    ds.height = r.u32();
    ds.width = r.u32();
    ds.class_count = r.u32();
    if (ds.channels == 0 || ds.height == 0 || ds.width == 0 || ds.class_count == 0)
        fail(Err::MalformedHeader, "zero dataset dimension");
    const uint64_t elems = static_cast<uint64_t>(ds.channels) * ds.height * ds.width;
    if (elems > (1ULL << 24)) fail(Err::MalformedHeader, "dataset sample too large");
    if (static_cast<uint64_t>(count) * (elems * 4 + 2) != r.remaining())
        fail(Err::TruncatedRecord, "dataset size disagrees with header");

    ds.inputs.resize(count);
    for (auto& sample : ds.inputs) {
        sample.resize(elems);
        for (float& v : sample) {
            v = r.f32();
            if (!std::isfinite(v)) fail(Err::NonFiniteValue, "dataset contains NaN or Inf");
        }
    }
    ds.labels.resize(count);
    for (uint16_t& l : ds.labels) {
        l = r.u16();
        if (l >= ds.class_count) fail(Err::MalformedHeader, "label out of range");
    }
    return ds;
}

double top_k_accuracy(const NetworkModel& model, const ToyDataset& ds, int k) {
    if (k < 1) fail(Err::BadConfig, "top_k_accuracy: k must be >= 1");
    if (ds.inputs.empty()) fail(Err::EmptyDataset, "dataset has no samples");

    ToyGraph graph = parse_graph(model);
    size_t hits = 0;
    for (size_t s = 0; s < ds.inputs.size(); ++s) {
        std::vector<float> scores = forward(model, graph, ds.inputs[s]);
        if (ds.labels[s] >= scores.size())
            fail(Err::ShapeMismatch, "label exceeds model output size");

        // rank of the true label: classes with a strictly better score, or an
        // equal score at a lower index, come first
        const float own = scores[ds.labels[s]];
        size_t rank = 0;
        for (size_t c = 0; c < scores.size(); ++c) {
            if (c == ds.labels[s]) continue;
            if (scores[c] > own || (scores[c] == own && c < ds.labels[s])) ++rank;
        }
        if (rank < static_cast<size_t>(k)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ds.inputs.size());
}

}  // namespace nnc
