// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failures. Each criterion carries its own time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "nnc/codebook.hpp"
#include "nnc/codec.hpp"
#include "nnc/inference.hpp"
#include "nnc/model_io.hpp"
#include "nnc/prescale.hpp"
#include "nnc/sweep.hpp"
#include "test_util.hpp"

using namespace nnc;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::vector<std::string> failure_notes;

struct Criterion {
    int number;
    const char* label;
    double budget_seconds;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string note;

    Criterion(int n, const char* text, double budget)
        : number(n), label(text), budget_seconds(budget) {}

    void expect(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            note = why;
        }
    }

    void finish() {
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && budget_seconds > 0 && elapsed > budget_seconds) {
            ok = false;
            note = "runtime " + std::to_string(elapsed) + "s exceeds budget " +
                   std::to_string(budget_seconds) + "s";
        }
        std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", number, label,
                    elapsed, ok ? "" : " -- ", ok ? "" : note.c_str());
        std::fflush(stdout);
        if (!ok) {
            ++failures;
            failure_notes.push_back("criterion " + std::to_string(number) + ": " + note);
        }
    }
};

// ------------------------------------------------------------ shared bits

fs::path fixture(const char* name) { return testutil::fixture_dir() / name; }

NetworkModel load_fixture_model() {
    return read_model(testutil::read_file(fixture("toynet.nnm")));
}

ToyDataset load_fixture_dataset() {
    return read_dataset(testutil::read_file(fixture("toyset.nnd")));
}

float ulp_of(float v) {
    return std::nextafter(std::fabs(v), std::numeric_limits<float>::infinity()) - std::fabs(v);
}

// independent cosine-definition oracle, same as the unit suite but local to
// the acceptance binary
std::vector<double> oracle_basis(uint32_t n) {
    std::vector<double> d(n * n);
    for (uint32_t k = 0; k < n; ++k)
        for (uint32_t j = 0; j < n; ++j) {
            double norm = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            d[k * n + j] = norm * std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
        }
    return d;
}

std::vector<double> oracle_dct2(const Block& x) {
    auto dr = oracle_basis(x.rows);
    auto dc = oracle_basis(x.cols);
    std::vector<double> tmp(x.data.size(), 0.0), out(x.data.size(), 0.0);
    for (uint32_t i = 0; i < x.rows; ++i)
        for (uint32_t j = 0; j < x.cols; ++j)
            for (uint32_t k = 0; k < x.rows; ++k)
                tmp[i * x.cols + j] += dr[i * x.rows + k] * x.data[k * x.cols + j];
    for (uint32_t i = 0; i < x.rows; ++i)
        for (uint32_t j = 0; j < x.cols; ++j)
            for (uint32_t k = 0; k < x.cols; ++k)
                out[i * x.cols + j] += tmp[i * x.cols + k] * dc[j * x.cols + k];
    return out;
}

double contiguous_partition_oracle(std::vector<float> values, uint32_t k) {
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    auto range_sse = [&](size_t i, size_t j) {
        double mean = 0.0;
        for (size_t t = i; t < j; ++t) mean += values[t];
        mean /= static_cast<double>(j - i);
        double sse = 0.0;
        for (size_t t = i; t < j; ++t) sse += (values[t] - mean) * (values[t] - mean);
        return sse;
    };
    std::vector<std::vector<double>> dp(
        k + 1, std::vector<double>(n + 1, std::numeric_limits<double>::infinity()));
    dp[0][0] = 0.0;
    for (uint32_t g = 1; g <= k; ++g)
        for (size_t j = 1; j <= n; ++j)
            for (size_t i = g - 1; i < j; ++i)
                if (dp[g - 1][i] < std::numeric_limits<double>::infinity())
                    dp[g][j] = std::min(dp[g][j], dp[g - 1][i] + range_sse(i, j));
    double best = dp[k][n];
    for (uint32_t g = 1; g < k; ++g) best = std::min(best, dp[g][n]);
    return best;
}

// the acceptance generator keeps bias/normalization tensors at realistic
// sizes while weight tensors go up to 1e5 elements
NetworkModel random_big_model(testutil::Rng& rng, int index) {
    NetworkModel m;
    size_t n_layers = 3 + rng.below(4);
    for (size_t i = 0; i < n_layers; ++i) {
        LayerParams layer;
        layer.name = "m" + std::to_string(index) + "_l" + std::to_string(i);
        switch (rng.below(5)) {
            case 0: {
                uint32_t h = 3 + static_cast<uint32_t>(rng.below(5));
                uint32_t w = h;
                uint32_t ci = 1 + static_cast<uint32_t>(rng.below(16));
                uint32_t co = 1 + static_cast<uint32_t>(
                                      rng.below(100000 / (h * w * ci) + 1));
                layer.kind = ParamKind::conv_kernel(h, w, ci, std::max(1u, co));
                break;
            }
            case 1: {
                uint32_t ci = 8 + static_cast<uint32_t>(rng.below(128));
                uint32_t co = 1 + static_cast<uint32_t>(rng.below(100000 / ci));
                layer.kind = ParamKind::conv1x1(ci, std::max(1u, co));
                break;
            }
            case 2: {
                uint32_t r = 16 + static_cast<uint32_t>(rng.below(256));
                uint32_t c = 1 + static_cast<uint32_t>(rng.below(100000 / r));
                layer.kind = ParamKind::dense(r, std::max(1u, c));
                break;
            }
            case 3:
                layer.kind = ParamKind::bias(1 + static_cast<uint32_t>(rng.below(3000)));
                break;
            default:
                layer.kind =
                    ParamKind::normalization(1 + static_cast<uint32_t>(rng.below(3000)));
                break;
        }
        layer.tensor.shape = layer.kind.dims;
        layer.tensor.values =
            testutil::random_values(rng, layer.kind.element_count(), -3.0f, 3.0f);
        m.layers.push_back(std::move(layer));
    }
    m.arch_meta = {'a', 'c', 'c'};
    return m;
}

int run_shell(const std::string& cmd) { return std::system(cmd.c_str()); }

// ------------------------------------------------------------- criteria

void criterion_1_reference_scale() {
    Criterion c(1, "large-scale reference factors are documentation only", 5.0);
#ifdef NNC_REPO_ROOT
    fs::path readme = fs::path(NNC_REPO_ROOT) / "README.md";
#else
    fs::path readme = "README.md";
#endif
    std::ifstream in(readme);
    c.expect(in.good(), "README.md not found");
    if (in.good()) {
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        c.expect(text.find("10.6") != std::string::npos &&
                     text.find("12.4") != std::string::npos,
                 "README.md does not record the reference compression factors");
    }
    c.finish();
}

void criterion_2_dct_oracle() {
    Criterion c(2, "DCT matches the cosine-matrix oracle on 500 random blocks", 5.0);
    testutil::Rng rng(2024);
    for (int trial = 0; trial < 500 && c.ok; ++trial) {
        uint32_t r = 1 + static_cast<uint32_t>(rng.below(11));
        uint32_t cl = 1 + static_cast<uint32_t>(rng.below(11));
        Block b{r, cl, testutil::random_values(rng, static_cast<size_t>(r) * cl)};
        Block y = dct2_forward(b);
        auto expect = oracle_dct2(b);
        for (size_t i = 0; i < y.data.size(); ++i)
            c.expect(std::fabs(y.data[i] - expect[i]) < 1e-5,
                     "forward differs from oracle at block " + std::to_string(trial));
        Block back = dct2_inverse(y);
        for (size_t i = 0; i < b.data.size(); ++i)
            c.expect(std::fabs(back.data[i] - b.data[i]) < 1e-5,
                     "round-trip error at block " + std::to_string(trial));
    }
    c.finish();
}

void criterion_3_quantizer_bound() {
    Criterion c(3, "quantizer reconstruction error is at most step/2 + 1 ulp", 5.0);
    testutil::Rng rng(3033);
    auto values = testutil::random_values(rng, 100000, -2.5f, 2.5f);
    for (int bits = 2; bits <= 16 && c.ok; ++bits) {
        QuantizerConfig cfg{bits};
        auto [indices, grid] = quantize(values, cfg);
        auto back = dequantize(indices, grid, cfg);
        float grid_top = grid.offset + grid.step * static_cast<float>(cfg.levels() - 1);
        double ulp = std::max(ulp_of(grid.offset), ulp_of(grid_top));
        double bound = static_cast<double>(grid.step) / 2.0 + ulp;
        for (size_t i = 0; i < values.size(); ++i) {
            double err = std::fabs(static_cast<double>(back[i]) - values[i]);
            c.expect(err <= bound, "error " + std::to_string(err) + " above bound at n=" +
                                       std::to_string(bits));
            if (!c.ok) break;
        }
    }
    c.finish();
}

void criterion_4_clustering_dominance() {
    Criterion c(4, "k-means never loses to uniform quantization at equal levels", 30.0);
    testutil::Rng rng(4044);
    for (int trial = 0; trial < 200 && c.ok; ++trial) {
        size_t n = 10 + rng.below(4991);
        auto values = testutil::random_values(rng, n, -4.0f, 4.0f);
        for (int bits = 2; bits <= 6; ++bits) {
            QuantizerConfig cfg{bits};
            ClusterResult r = kmeans_encode(values, cfg, trial);
            auto [indices, grid] = quantize(values, cfg);
            auto back = dequantize(indices, grid, cfg);
            double uniform = 0.0;
            for (size_t i = 0; i < n; ++i) {
                double d = static_cast<double>(back[i]) - values[i];
                uniform += d * d;
            }
            c.expect(static_cast<double>(r.distortion) <= uniform * (1.0 + 1e-9) + 1e-9,
                     "kmeans " + std::to_string(r.distortion) + " > uniform " +
                         std::to_string(uniform) + " at n=" + std::to_string(bits));
            if (!c.ok) break;
        }
    }

    // the pinned four-point instance against the exhaustive-partition oracle
    std::vector<float> four{0.0f, 1.0f, 2.0f, 10.0f};
    double oracle = contiguous_partition_oracle(four, 2);
    c.expect(oracle == 2.0, "oracle value is not 2.0");
    ClusterResult r = kmeans_encode(four, QuantizerConfig{1}, 99);
    c.expect(r.distortion == 2.0f, "4-point distortion " + std::to_string(r.distortion));
    c.finish();
}

void criterion_5_end_to_end_bounds() {
    Criterion c(5, "n=16 round-trip preserves structure and analytic error bounds", 60.0);
    testutil::Rng rng(5055);
    QuantizerConfig cfg{16};
    for (int trial = 0; trial < 20 && c.ok; ++trial) {
        NetworkModel m = random_big_model(rng, trial);
        CompressedModel compressed = encode_network(m, cfg, trial, MethodSet::Full);
        NetworkModel d = decode_network(compressed);

        c.expect(d.layers.size() == m.layers.size(), "layer count changed");
        for (size_t i = 0; i < m.layers.size() && c.ok; ++i) {
            c.expect(d.layers[i].name == m.layers[i].name, "name changed");
            c.expect(d.layers[i].kind == m.layers[i].kind, "kind changed");
            c.expect(d.layers[i].tensor.shape == m.layers[i].tensor.shape, "shape changed");

            const EncodedLayer& el = compressed.layers[i];
            const auto& orig = m.layers[i].tensor.values;
            const auto& rec = d.layers[i].tensor.values;

            if (el.method == LayerMethod::TransformQuant) {
                size_t area = el.kind.tag == ParamKindTag::ConvKernel
                                  ? static_cast<size_t>(el.kind.dims[0]) * el.kind.dims[1]
                                  : 64;
                double bound = std::sqrt(static_cast<double>(area)) * el.grid.step / 2.0 *
                                   el.prescale_factor * (1.0 + 1e-3) +
                               1e-4 * el.prescale_factor;
                size_t blocks = (orig.size() + area - 1) / area;
                for (size_t b = 0; b < blocks && c.ok; ++b) {
                    double sse = 0.0;
                    for (size_t j = b * area; j < std::min(orig.size(), (b + 1) * area); ++j) {
                        double diff = static_cast<double>(orig[j]) - rec[j];
                        sse += diff * diff;
                    }
                    c.expect(std::sqrt(sse) <= bound,
                             "block L2 " + std::to_string(std::sqrt(sse)) + " over bound " +
                                 std::to_string(bound) + " in " + m.layers[i].name);
                }
            } else if (el.method == LayerMethod::CodeBookMethod) {
                auto [scaled, factor] = prescale(orig);
                ClusterResult k = kmeans_encode(scaled, cfg, layer_seed(el.name, trial));
                double sse = 0.0, slack = 0.0;
                for (size_t j = 0; j < orig.size(); ++j) {
                    double diff = static_cast<double>(orig[j]) - rec[j];
                    sse += diff * diff;
                    double u = 2.4e-7 * std::fabs(orig[j]) + 1e-12;
                    slack += u * u;
                }
                double limit = static_cast<double>(factor.factor) * factor.factor *
                                   static_cast<double>(k.distortion) * (1.0 + 1e-4) +
                               slack;
                c.expect(sse <= limit, "codebook sse " + std::to_string(sse) + " over " +
                                           std::to_string(limit) + " in " + m.layers[i].name);
            }
        }
    }
    c.finish();
}

void criterion_6_determinism() {
    Criterion c(6, "encode output is byte-identical across worker counts and runs", 60.0);
    NetworkModel m = load_fixture_model();
    QuantizerConfig cfg{6};
    auto one = write_compressed(encode_network(m, cfg, 7, MethodSet::Full, 1));
    auto eight = write_compressed(encode_network(m, cfg, 7, MethodSet::Full, 8));
    auto again = write_compressed(encode_network(m, cfg, 7, MethodSet::Full, 8));
    c.expect(one == eight, "1-worker and 8-worker outputs differ");
    c.expect(eight == again, "repeated 8-worker runs differ");
    c.finish();
}

void criterion_7_fixture_rd() {
    Criterion c(7, "desk-scale rate-distortion behavior on the bundled fixture", 120.0);
    NetworkModel model = load_fixture_model();
    ToyDataset dataset = load_fixture_dataset();
    const uint64_t original_bytes = testutil::read_file(fixture("toynet.nnm")).size();
    const double baseline = top_k_accuracy(model, dataset, 1);

    // (a) full pipeline loses at most 2 points from n=6 up, (d) per-layer
    // MSE non-increasing over n in 3..10
    std::vector<std::vector<double>> mse(model.layers.size());
    uint64_t full_bytes_n6 = 0;
    for (int bits = 3; bits <= 10; ++bits) {
        CompressedModel compressed =
            encode_network(model, QuantizerConfig{bits}, 7, MethodSet::Full);
        auto blob = write_compressed(compressed);
        NetworkModel decoded = decode_network(read_compressed(blob));
        if (bits == 6) full_bytes_n6 = blob.size();

        for (size_t i = 0; i < model.layers.size(); ++i) {
            double sse = 0.0;
            const auto& a = model.layers[i].tensor.values;
            const auto& b = decoded.layers[i].tensor.values;
            for (size_t j = 0; j < a.size(); ++j) {
                double diff = static_cast<double>(a[j]) - b[j];
                sse += diff * diff;
            }
            mse[i].push_back(sse / static_cast<double>(a.size()));
        }

        if (bits >= 6) {
            double acc = top_k_accuracy(decoded, dataset, 1);
            double loss_pp = (baseline - acc) * 100.0;
            c.expect(loss_pp <= 2.0, "(a) loss " + std::to_string(loss_pp) + "pp at n=" +
                                         std::to_string(bits));
        }
    }
    for (size_t i = 0; i < mse.size(); ++i)
        for (size_t j = 1; j < mse[i].size(); ++j)
            c.expect(mse[i][j] <= mse[i][j - 1] * (1.0 + 1e-9) + 1e-12,
                     "(d) layer " + model.layers[i].name + " MSE rises from n=" +
                         std::to_string(3 + static_cast<int>(j) - 1));

    // (b) near-lossless at n=16
    {
        NetworkModel decoded = decode_network(
            read_compressed(write_compressed(encode_network(model, QuantizerConfig{16}, 7,
                                                            MethodSet::Full))));
        double loss_pp = (baseline - top_k_accuracy(decoded, dataset, 1)) * 100.0;
        c.expect(loss_pp <= 0.5, "(b) loss " + std::to_string(loss_pp) + "pp at n=16");
    }

    // (c) compression factor at n=6, (e) full no larger than quant-only
    {
        double factor = compression_factor(original_bytes, full_bytes_n6);
        c.expect(factor >= 4.0, "(c) factor " + std::to_string(factor) + " below 4.0");
        auto quant_blob = write_compressed(
            encode_network(model, QuantizerConfig{6}, 7, MethodSet::QuantOnly));
        c.expect(full_bytes_n6 <= quant_blob.size(),
                 "(e) full " + std::to_string(full_bytes_n6) + " > quant-only " +
                     std::to_string(quant_blob.size()));
    }
    c.finish();
}

void criterion_8_format_robustness() {
    Criterion c(8, "10^4 byte mutations of an NNC file yield only typed errors", 60.0);
    NetworkModel model = load_fixture_model();
    auto blob = write_compressed(encode_network(model, QuantizerConfig{6}, 7, MethodSet::Full));

    std::vector<std::vector<uint32_t>> original_shapes;
    for (const auto& l : model.layers) original_shapes.push_back(l.kind.dims);

    testutil::Rng rng(8088);
    int parsed_ok = 0, typed_errors = 0;
    for (int trial = 0; trial < 10000 && c.ok; ++trial) {
        auto mutated = blob;
        size_t pos = rng.below(mutated.size());
        mutated[pos] ^= static_cast<uint8_t>(1 + rng.below(255));
        try {
            NetworkModel decoded = decode_network(read_compressed(mutated));
            // values may change; the structure must not silently drift
            c.expect(decoded.layers.size() == model.layers.size(),
                     "mutation at " + std::to_string(pos) + " changed the layer count");
            for (size_t i = 0; i < decoded.layers.size() && c.ok; ++i)
                c.expect(decoded.layers[i].kind.dims == original_shapes[i],
                         "mutation at " + std::to_string(pos) + " changed a tensor shape");
            ++parsed_ok;
        } catch (const CodecError&) {
            ++typed_errors;
        } catch (const std::exception& e) {
            c.expect(false, std::string("untyped exception: ") + e.what());
        }
    }
    std::printf("        (%d typed errors, %d benign parses)\n", typed_errors, parsed_ok);
    c.finish();
}

void criterion_9_bzip2_interop() {
    Criterion c(9, "every layer payload decompresses with the external bzip2 tool", 60.0);
    if (run_shell("bzip2 --help >/dev/null 2>&1") != 0) {
        c.expect(false, "bzip2 tool not available");
        c.finish();
        return;
    }

    NetworkModel model = load_fixture_model();
    auto blob = write_compressed(encode_network(model, QuantizerConfig{6}, 7, MethodSet::Full));
    CompressedModel compressed = read_compressed(blob);

    fs::path dir = fs::temp_directory_path();
    for (size_t i = 0; i < compressed.layers.size() && c.ok; ++i) {
        const EncodedLayer& layer = compressed.layers[i];
        fs::path in = dir / ("nnc_accept_payload_" + std::to_string(i) + ".bz2");
        fs::path out = dir / ("nnc_accept_payload_" + std::to_string(i) + ".raw");
        testutil::write_file(in, layer.payload);
        int rc = run_shell("bzip2 -dc " + in.string() + " > " + out.string());
        c.expect(rc == 0, "bzip2 -dc failed on layer " + layer.name);
        if (rc == 0) {
            auto external = testutil::read_file(out);
            auto internal = entropy_decompress(layer.payload);
            c.expect(external == internal,
                     "external and internal decompression differ on " + layer.name);
        }
        fs::remove(in);
        fs::remove(out);
    }
    c.finish();
}

}  // namespace

int main() {
    std::printf("== nnc acceptance suite ==\n");
    criterion_1_reference_scale();
    criterion_2_dct_oracle();
    criterion_3_quantizer_bound();
    criterion_4_clustering_dominance();
    criterion_5_end_to_end_bounds();
    criterion_6_determinism();
    criterion_7_fixture_rd();
    criterion_8_format_robustness();
    criterion_9_bzip2_interop();

    if (failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria FAILED:\n", failures);
        for (const std::string& note : failure_notes) std::printf("  %s\n", note.c_str());
    }
    return failures;
}
