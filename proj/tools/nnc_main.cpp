// nnc: compress / decompress / inspect neural-network parameter files and
// run rate-distortion sweeps against a toy evaluation set.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "nnc/codec.hpp"
#include "nnc/inference.hpp"
#include "nnc/model_io.hpp"
#include "nnc/sweep.hpp"

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) nnc::fail(nnc::Err::IoError, "cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) nnc::fail(nnc::Err::IoError, "cannot write '" + path + "'");
}

nnc::MethodSet parse_method(const std::string& name) {
    if (name == "full") return nnc::MethodSet::Full;
    if (name == "quant") return nnc::MethodSet::QuantOnly;
    if (name == "cluster") return nnc::MethodSet::ClusterAll;
    nnc::fail(nnc::Err::BadConfig, "unknown method '" + name + "' (full|quant|cluster)");
}

std::vector<int> parse_bits_range(const std::string& text) {
    std::vector<int> bits;
    size_t dots = text.find("..");
    if (dots == std::string::npos) {
        bits.push_back(std::stoi(text));
    } else {
        int lo = std::stoi(text.substr(0, dots));
        int hi = std::stoi(text.substr(dots + 2));
        if (lo > hi) nnc::fail(nnc::Err::BadConfig, "bits range is reversed");
        for (int n = lo; n <= hi; ++n) bits.push_back(n);
    }
    for (int n : bits) nnc::validate_config(nnc::QuantizerConfig{n});
    return bits;
}

const char* kind_text(const nnc::ParamKind& kind) {
    switch (kind.tag) {
        case nnc::ParamKindTag::ConvKernel: return "conv";
        case nnc::ParamKindTag::Conv1x1: return "conv1x1";
        case nnc::ParamKindTag::DenseMatrix: return "dense";
        case nnc::ParamKindTag::BiasVector: return "bias";
        case nnc::ParamKindTag::NormalizationVector: return "norm";
    }
    return "?";
}

const char* method_text(nnc::LayerMethod m) {
    switch (m) {
        case nnc::LayerMethod::TransformQuant: return "transform+quant";
        case nnc::LayerMethod::DirectQuant: return "quant";
        case nnc::LayerMethod::CodeBookMethod: return "codebook";
        case nnc::LayerMethod::Raw: return "raw";
    }
    return "?";
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

int cmd_compress(const std::string& in, const std::string& out, int bits,
                 const std::string& method, uint64_t seed, unsigned workers) {
    nnc::NetworkModel model = nnc::read_model(read_file(in));
    double t0 = now_seconds();
    nnc::CompressedModel compressed = nnc::encode_network(
        model, nnc::QuantizerConfig{bits}, seed, parse_method(method), workers);
    std::vector<uint8_t> blob = nnc::write_compressed(compressed);
    double elapsed = now_seconds() - t0;
    write_file(out, blob);

    uint64_t original = nnc::write_model(model).size();
    std::printf("%s: %llu -> %zu bytes (factor %.3f) in %.3fs [%s, n=%d]\n", out.c_str(),
                static_cast<unsigned long long>(original), blob.size(),
                nnc::compression_factor(original, blob.size()), elapsed, method.c_str(), bits);
    return 0;
}

int cmd_decompress(const std::string& in, const std::string& out) {
    double t0 = now_seconds();
    nnc::NetworkModel model = nnc::decode_network(nnc::read_compressed(read_file(in)));
    double elapsed = now_seconds() - t0;
    std::vector<uint8_t> bytes = nnc::write_model(model);
    write_file(out, bytes);
    std::printf("%s: %zu layers, %zu bytes in %.3fs\n", out.c_str(), model.layers.size(),
                bytes.size(), elapsed);
    return 0;
}

int cmd_inspect(const std::string& in) {
    std::vector<uint8_t> blob = read_file(in);
    nnc::CompressedModel c = nnc::read_compressed(blob);
    std::printf("%s: NNC v%d, bits %d, method set %s, %zu layers, %zu bytes\n", in.c_str(),
                c.version, c.cfg.bits, nnc::method_set_name(c.method_set), c.layers.size(),
                blob.size());

    size_t payload_total = 0;
    for (const nnc::EncodedLayer& l : c.layers) {
        std::string dims;
        for (size_t i = 0; i < l.kind.dims.size(); ++i)
            dims += (i ? "x" : "") + std::to_string(l.kind.dims[i]);
        std::string meta = "prescale " + std::to_string(l.prescale_factor);
        if (l.method == nnc::LayerMethod::TransformQuant ||
            l.method == nnc::LayerMethod::DirectQuant)
            meta += ", grid offset " + std::to_string(l.grid.offset) + " step " +
                    std::to_string(l.grid.step);
        if (l.method == nnc::LayerMethod::CodeBookMethod)
            meta += ", " + std::to_string(l.codebook.centroids.size()) + " centroids";
        if (l.arrangement)
            meta += ", pad " + std::to_string(l.arrangement->pad_len);
        std::printf("  %-16s %-8s %-12s %-16s payload %8zu B  (%s)\n", l.name.c_str(),
                    kind_text(l.kind), dims.c_str(), method_text(l.method), l.payload.size(),
                    meta.c_str());
        payload_total += l.payload.size();
    }
    std::printf("  payload total %zu B, metadata %zu B, arch_meta %zu B\n", payload_total,
                blob.size() - payload_total - c.arch_meta.size(), c.arch_meta.size());
    return 0;
}

int cmd_sweep(const std::string& model_path, const std::string& data_path,
              const std::string& bits_text, const std::string& methods_text,
              const std::string& csv_path, uint64_t seed, int topk, unsigned workers) {
    nnc::NetworkModel model = nnc::read_model(read_file(model_path));
    nnc::ToyDataset dataset = nnc::read_dataset(read_file(data_path));

    nnc::SweepRequest req;
    req.bits = parse_bits_range(bits_text);
    std::string rest = methods_text;
    while (!rest.empty()) {
        size_t comma = rest.find(',');
        req.methods.push_back(parse_method(rest.substr(0, comma)));
        rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    }
    req.seed = seed;
    req.top_k = topk;
    req.workers = workers;

    std::vector<nnc::RDPoint> points = nnc::rd_sweep(model, dataset, req);
    for (const nnc::RDPoint& p : points)
        std::printf("%-8s n=%-2d %8llu B  factor %7.3f  top%d %.4f  loss %+.2f pp  "
                    "(enc %.3fs, dec %.3fs)\n",
                    nnc::method_set_name(p.method_set), p.bits,
                    static_cast<unsigned long long>(p.compressed_bytes), p.factor, topk,
                    p.top_k, p.loss_pp, p.encode_seconds, p.decode_seconds);

    for (nnc::MethodSet m : req.methods) {
        std::vector<nnc::RDPoint> curve;
        for (const nnc::RDPoint& p : points)
            if (p.method_set == m) curve.push_back(p);
        for (double loss : {1.0, 2.0}) {
            try {
                double f = nnc::interpolate_factor_at_loss(curve, loss);
                std::printf("%s: factor %.2f at %.0f pp loss\n", nnc::method_set_name(m), f,
                            loss);
            } catch (const nnc::CodecError&) {
                std::printf("%s: %.0f pp loss not bracketed by this sweep\n",
                            nnc::method_set_name(m), loss);
            }
        }
    }

    std::string csv = nnc::emit_csv(points);
    write_file(csv_path, std::vector<uint8_t>(csv.begin(), csv.end()));
    std::printf("wrote %s (%zu points)\n", csv_path.c_str(), points.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nnc: transform-coding compressor for neural network parameters"};
    app.require_subcommand(1);

    std::string in, out, method = "full", bits_text = "3..10";
    std::string methods_text = "full,quant,cluster";
    std::string model_path, data_path, csv_path;
    int bits = 6;
    int topk = 1;
    uint64_t seed = 0;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());

    auto* compress = app.add_subcommand("compress", "compress an NNM model into an NNC file");
    compress->add_option("--bits", bits, "quantizer bit depth (2..16)")->required();
    compress->add_option("--method", method, "full|quant|cluster (default full)");
    compress->add_option("--seed", seed, "clustering seed");
    compress->add_option("--workers", workers, "parallel layer encoders");
    compress->add_option("input", in, "input .nnm")->required();
    compress->add_option("output", out, "output .nnc")->required();

    auto* decompress = app.add_subcommand("decompress", "decode an NNC file back to NNM");
    decompress->add_option("input", in, "input .nnc")->required();
    decompress->add_option("output", out, "output .nnm")->required();

    auto* inspect = app.add_subcommand("inspect", "print per-layer records of an NNC file");
    inspect->add_option("input", in, "input .nnc")->required();

    auto* sweep = app.add_subcommand("sweep", "rate-distortion sweep over bit depths");
    sweep->add_option("--model", model_path, "model .nnm")->required();
    sweep->add_option("--data", data_path, "dataset .nnd")->required();
    sweep->add_option("--bits", bits_text, "range LO..HI or single N (default 3..10)");
    sweep->add_option("--methods", methods_text, "comma list of full|quant|cluster");
    sweep->add_option("--csv", csv_path, "output CSV path")->required();
    sweep->add_option("--seed", seed, "clustering seed");
    sweep->add_option("--topk", topk, "accuracy rank (default 1)");
    sweep->add_option("--workers", workers, "parallel layer encoders");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compress->parsed())
            return cmd_compress(in, out, bits, method, seed, workers);
        if (decompress->parsed()) return cmd_decompress(in, out);
        if (inspect->parsed()) return cmd_inspect(in);
        if (sweep->parsed())
            return cmd_sweep(model_path, data_path, bits_text, methods_text, csv_path, seed,
                             topk, workers);
    } catch (const nnc::CodecError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
