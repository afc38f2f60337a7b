#include <benchmark/benchmark.h>

#include <vector>

#include "nnc/bz2.hpp"
#include "nnc/codebook.hpp"
#include "nnc/codec.hpp"
#include "nnc/quantizer.hpp"
#include "nnc/transform.hpp"

namespace {

struct Lcg {
    uint64_t s = 0x2545f4914f6cdd1dULL;
    uint64_t next() {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return s >> 16;
    }
    float uniform() { return static_cast<float>(next() % 100000) / 50000.0f - 1.0f; }
};

std::vector<float> random_floats(size_t n) {
    Lcg lcg;
    std::vector<float> v(n);
    for (auto& x : v) x = lcg.uniform();
    return v;
}

nnc::NetworkModel bench_model() {
    Lcg lcg;
    nnc::NetworkModel m;
    auto add = [&](const char* name, nnc::ParamKind kind) {
        nnc::LayerParams l;
        l.name = name;
        l.kind = kind;
        l.tensor.shape = kind.dims;
        l.tensor.values.resize(kind.element_count());
        for (auto& v : l.tensor.values) v = lcg.uniform();
        m.layers.push_back(std::move(l));
    };
    add("conv1", nnc::ParamKind::conv_kernel(7, 7, 3, 16));
    add("b1", nnc::ParamKind::bias(16));
    add("conv2", nnc::ParamKind::conv_kernel(3, 3, 16, 32));
    add("b2", nnc::ParamKind::bias(32));
    add("fc", nnc::ParamKind::dense(128, 512));
    add("g", nnc::ParamKind::normalization(128));
    return m;
}

void BM_Dct2Forward(benchmark::State& state) {
    const uint32_t n = static_cast<uint32_t>(state.range(0));
    nnc::Block block{n, n, random_floats(static_cast<size_t>(n) * n)};
    for (auto _ : state) {
        auto out = nnc::dct2_forward(block);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Dct2Forward)->Arg(3)->Arg(7)->Arg(8)->Arg(11);

void BM_Quantize(benchmark::State& state) {
    auto values = random_floats(static_cast<size_t>(state.range(0)));
    nnc::QuantizerConfig cfg{6};
    for (auto _ : state) {
        auto out = nnc::quantize(values, cfg);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Quantize)->Range(1024, 1 << 18);

void BM_KmeansEncode(benchmark::State& state) {
    auto values = random_floats(static_cast<size_t>(state.range(0)));
    nnc::QuantizerConfig cfg{5};
    for (auto _ : state) {
        auto out = nnc::kmeans_encode(values, cfg, 42);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KmeansEncode)->Arg(256)->Arg(2048)->Arg(8192);

void BM_Bzip2Compress(benchmark::State& state) {
    // quantized-index-like bytes: skewed distribution with runs
    Lcg lcg;
    std::vector<uint8_t> data(static_cast<size_t>(state.range(0)));
    for (auto& b : data) {
        uint64_t r = lcg.next() % 100;
        b = r < 60 ? 31 : static_cast<uint8_t>(lcg.next() % 64);
    }
    for (auto _ : state) {
        auto out = nnc::bz2::compress(data);
        benchmark::DoNotOptimize(out);
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bzip2Compress)->Range(4096, 1 << 20);

void BM_Bzip2Decompress(benchmark::State& state) {
    Lcg lcg;
    std::vector<uint8_t> data(static_cast<size_t>(state.range(0)));
    for (auto& b : data) b = static_cast<uint8_t>(lcg.next() % 32);
    auto packed = nnc::bz2::compress(data);
    for (auto _ : state) {
        auto out = nnc::bz2::decompress(packed);
        benchmark::DoNotOptimize(out);
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bzip2Decompress)->Range(4096, 1 << 20);

void BM_EncodeNetwork(benchmark::State& state) {
    nnc::NetworkModel model = bench_model();
    nnc::QuantizerConfig cfg{static_cast<int>(state.range(0))};
    for (auto _ : state) {
        auto out = nnc::encode_network(model, cfg, 1, nnc::MethodSet::Full);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_EncodeNetwork)->Arg(4)->Arg(6)->Arg(8);

void BM_DecodeNetwork(benchmark::State& state) {
    nnc::NetworkModel model = bench_model();
    auto compressed = nnc::encode_network(model, nnc::QuantizerConfig{6}, 1,
                                          nnc::MethodSet::Full);
    auto blob = nnc::write_compressed(compressed);
    for (auto _ : state) {
        auto out = nnc::decode_network(nnc::read_compressed(blob));
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_DecodeNetwork);

}  // namespace

BENCHMARK_MAIN();
