#pragma once

// Shared helpers for the test binaries: a deterministic generator so every
// run sees the same "random" data, model builders, and fixture paths.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nnc/types.hpp"

namespace testutil {

struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t below(uint64_t n) {
        return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    float uniform(float lo, float hi) {
        return lo + static_cast<float>(unit()) * (hi - lo);
    }
};

inline std::filesystem::path fixture_dir() {
#ifdef NNC_FIXTURE_DIR
    return std::filesystem::path(NNC_FIXTURE_DIR);
#else
    return std::filesystem::path("tests/fixtures");
#endif
}

inline std::vector<uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

inline std::vector<float> random_values(Rng& rng, size_t n, float lo = -1.0f, float hi = 1.0f) {
    std::vector<float> v(n);
    for (float& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Mixed-kind model with structurally valid layers; tensor shapes equal the
// kind dims. max_elems caps the big weight tensors.
inline nnc::NetworkModel random_model(Rng& rng, size_t n_layers, size_t max_elems = 4096) {
    nnc::NetworkModel model;
    for (size_t i = 0; i < n_layers; ++i) {
        nnc::LayerParams layer;
        layer.name = "layer_" + std::to_string(i);
        switch (rng.below(5)) {
            case 0: {
                uint32_t h = 1 + static_cast<uint32_t>(rng.below(7));
                uint32_t w = h == 1 ? 2 + static_cast<uint32_t>(rng.below(6))
                                    : 1 + static_cast<uint32_t>(rng.below(7));
                uint32_t max_ch = static_cast<uint32_t>(
                    std::max<size_t>(1, max_elems / (static_cast<size_t>(h) * w)));
                uint32_t ci = 1 + static_cast<uint32_t>(rng.below(std::min<uint32_t>(8, max_ch)));
                uint32_t co = 1 + static_cast<uint32_t>(
                                      rng.below(std::max<uint32_t>(1, max_ch / ci)));
                layer.kind = nnc::ParamKind::conv_kernel(h, w, ci, co);
                break;
            }
            case 1: {
                uint32_t ci = 1 + static_cast<uint32_t>(rng.below(40));
                uint32_t co = 1 + static_cast<uint32_t>(rng.below(40));
                layer.kind = nnc::ParamKind::conv1x1(ci, co);
                break;
            }
            case 2: {
                uint32_t r = 1 + static_cast<uint32_t>(rng.below(50));
                uint32_t c = 1 + static_cast<uint32_t>(
                                     rng.below(std::max<size_t>(1, max_elems / r)));
                layer.kind = nnc::ParamKind::dense(r, c);
                break;
            }
            case 3:
                layer.kind = nnc::ParamKind::bias(1 + static_cast<uint32_t>(rng.below(300)));
                break;
            default:
                layer.kind =
                    nnc::ParamKind::normalization(1 + static_cast<uint32_t>(rng.below(300)));
                break;
        }
        layer.tensor.shape = layer.kind.dims;
        layer.tensor.values = random_values(rng, layer.kind.element_count(), -2.0f, 2.0f);
        model.layers.push_back(std::move(layer));
    }
    model.arch_meta = {0x00, 0x7f, 'm', 'e', 't', 'a', 0xff};
    return model;
}

}  // namespace testutil
