#include "nnc/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "nnc/codec.hpp"
#include "nnc/model_io.hpp"

namespace nnc {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// RFC 4180: quote only when the field contains a comma, quote or newline.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return q;
}

}  // namespace

const char* method_set_name(MethodSet m) {
    switch (m) {
        case MethodSet::Full: return "full";
        case MethodSet::QuantOnly: return "quant";
        case MethodSet::ClusterAll: return "cluster";
    }
    return "?";
}

std::vector<RDPoint> rd_sweep(const NetworkModel& model, const ToyDataset& dataset,
                              const SweepRequest& request) {
    if (dataset.inputs.empty()) fail(Err::EmptyDataset, "rd_sweep: empty dataset");
    if (request.bits.empty() || request.methods.empty())
        fail(Err::BadConfig, "rd_sweep: nothing to sweep");
    for (int b : request.bits)
        validate_config(QuantizerConfig{b});

    const uint64_t original_bytes = write_model(model).size();
    const double baseline = top_k_accuracy(model, dataset, request.top_k);

    std::vector<RDPoint> points;
    points.reserve(request.bits.size() * request.methods.size());
    for (MethodSet method : request.methods) {
        for (int bits : request.bits) {
            try {
                RDPoint p;
                p.method_set = method;
                p.bits = bits;

                auto t0 = std::chrono::steady_clock::now();
                CompressedModel compressed =
                    encode_network(model, QuantizerConfig{bits}, request.seed, method,
                                   request.workers);
                std::vector<uint8_t> blob = write_compressed(compressed);
                p.encode_seconds = seconds_since(t0);
                p.compressed_bytes = blob.size();
                p.factor = compression_factor(original_bytes, blob.size());

                auto t1 = std::chrono::steady_clock::now();
                NetworkModel decoded = decode_network(read_compressed(blob));
                p.decode_seconds = seconds_since(t1);

                p.top_k = top_k_accuracy(decoded, dataset, request.top_k);
                p.loss_pp = (baseline - p.top_k) * 100.0;
                points.push_back(p);
            } catch (const CodecError& e) {
                throw CodecError(e.code(), std::string("sweep point (") +
                                               method_set_name(method) + ", n=" +
                                               std::to_string(bits) + "): " + e.what());
            }
        }
    }
    return points;
}

double interpolate_factor_at_loss(std::vector<RDPoint> points, double loss_pp) {
    if (points.size() < 2) fail(Err::NotBracketed, "need at least two points");
    std::sort(points.begin(), points.end(),
              [](const RDPoint& a, const RDPoint& b) { return a.factor < b.factor; });

    for (size_t i = 0; i + 1 < points.size(); ++i) {
        double l0 = points[i].loss_pp, l1 = points[i + 1].loss_pp;
        if (l0 == loss_pp) return points[i].factor;
        if ((l0 - loss_pp) * (l1 - loss_pp) <= 0.0) {
            if (l0 == l1) return points[i].factor;
            double t = (loss_pp - l0) / (l1 - l0);
            return points[i].factor + t * (points[i + 1].factor - points[i].factor);
        }
    }
    if (points.back().loss_pp == loss_pp) return points.back().factor;
    fail(Err::NotBracketed,
         "loss level " + format_float(loss_pp) + " is not bracketed by the curve");
}

std::string emit_csv(std::vector<RDPoint> points) {
    std::sort(points.begin(), points.end(), [](const RDPoint& a, const RDPoint& b) {
        if (a.method_set != b.method_set)
            return static_cast<int>(a.method_set) < static_cast<int>(b.method_set);
        return a.bits < b.bits;
    });

    std::string out = "method,bits,compressed_bytes,factor,topk,loss_pp\r\n";
    for (const RDPoint& p : points) {
        out += csv_field(method_set_name(p.method_set)) + ",";
        out += std::to_string(p.bits) + ",";
        out += std::to_string(p.compressed_bytes) + ",";
        out += format_float(p.factor) + ",";
        out += format_float(p.top_k) + ",";
        out += format_float(p.loss_pp) + "\r\n";
    }
    return out;
}

}  // namespace nnc
