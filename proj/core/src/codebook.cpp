#include "nnc/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nnc/error.hpp"

namespace nnc {
namespace {

// Deterministic 64-bit generator; std distributions are not portable so the
// bounded draw is spelled out here.
struct SplitMix64 {
    uint64_t state;

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
};

void check_cluster_bits(const QuantizerConfig& cfg) {
    if (cfg.bits < 1 || cfg.bits > 16)
        fail(Err::BadConfig, "cluster bits must be in [1, 16], got " + std::to_string(cfg.bits));
}

// Centroids deduplicated and sorted by value for nearest lookups; `slot` is
// the original centroid index (ties resolve to the lowest slot).
struct ViewEntry {
    double value;
    uint32_t slot;
};

std::vector<ViewEntry> make_view(const std::vector<double>& centroids) {
    std::vector<ViewEntry> view(centroids.size());
    for (uint32_t i = 0; i < centroids.size(); ++i) view[i] = {centroids[i], i};
    std::sort(view.begin(), view.end(), [](const ViewEntry& a, const ViewEntry& b) {
        return a.value != b.value ? a.value < b.value : a.slot < b.slot;
    });
    view.erase(std::unique(view.begin(), view.end(),
                           [](const ViewEntry& a, const ViewEntry& b) { return a.value == b.value; }),
               view.end());
    return view;
}

// True if candidate c is a better match for x than current b.
bool better(const ViewEntry& c, const ViewEntry& b, double x) {
    double dc = std::fabs(x - c.value), db = std::fabs(x - b.value);
    if (dc != db) return dc < db;
    return c.slot < b.slot;
}

}  // namespace

ClusterResult lloyd_run(std::span<const float> values, std::vector<float> centroids, int steps,
                        std::vector<double>* step_distortions) {
    if (values.empty()) fail(Err::EmptyInput, "lloyd_run: empty input");
    if (centroids.empty()) fail(Err::BadConfig, "lloyd_run: no centroids");
    const size_t n = values.size();
    const uint32_t k = static_cast<uint32_t>(centroids.size());
    if (step_distortions) step_distortions->clear();

    // sorted copy of the data; assignment is a single merge pass per step
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return values[a] < values[b]; });

    std::vector<double> cents(centroids.begin(), centroids.end());
    std::vector<uint32_t> assign(n, 0), prev_assign;

    auto assign_pass = [&](const std::vector<double>& cs) {
        auto view = make_view(cs);
        double sse = 0.0;
        size_t j = 0;
        for (uint32_t oi : order) {
            double x = values[oi];
            while (j + 1 < view.size() && better(view[j + 1], view[j], x)) ++j;
            assign[oi] = view[j].slot;
            double d = x - view[j].value;
            sse += d * d;
        }
        return sse;
    };

    double sse = 0.0;
    for (int step = 0; step < steps; ++step) {
        sse = assign_pass(cents);
        if (step_distortions) step_distortions->push_back(sse);
        if (assign == prev_assign) break;
        prev_assign = assign;

        std::vector<double> sum(k, 0.0);
        std::vector<uint64_t> count(k, 0);
        for (size_t i = 0; i < n; ++i) {
            sum[assign[i]] += values[i];
            ++count[assign[i]];
        }
        for (uint32_t c = 0; c < k; ++c)
            if (count[c] > 0) cents[c] = sum[c] / static_cast<double>(count[c]);

        // empty clusters grab the point currently farthest from its centroid
        for (uint32_t c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            double worst = -1.0;
            size_t worst_i = 0;
            for (size_t i = 0; i < n; ++i) {
                double d = std::fabs(static_cast<double>(values[i]) - cents[assign[i]]);
                if (d > worst) {
                    worst = d;
                    worst_i = i;
                }
            }
            cents[c] = values[worst_i];
            assign[worst_i] = c;
            count[c] = 1;
        }
    }

    // finalize against float centroids so indices/distortion match what a
    // decoder reconstructs from the signaled book
    ClusterResult result;
    result.codebook.centroids.assign(cents.begin(), cents.end());
    std::vector<double> final_cents(result.codebook.centroids.begin(),
                                    result.codebook.centroids.end());
    double final_sse = assign_pass(final_cents);
    result.indices = assign;
    result.distortion = static_cast<float>(final_sse);
    return result;
}

ClusterResult kmeans_encode(std::span<const float> values, const QuantizerConfig& cfg,
                            uint64_t seed) {
    check_cluster_bits(cfg);
    if (values.empty()) fail(Err::EmptyInput, "kmeans_encode: empty input");
    const uint32_t k = cfg.levels();

    float lo = values[0], hi = values[0];
    for (float v : values) {
        if (!std::isfinite(v)) fail(Err::NonFiniteInput, "kmeans_encode: NaN or Inf");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    std::vector<float> distinct(values.begin(), values.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    if (distinct.size() <= k) {
        // one centroid per distinct value: distortion is exactly zero
        ClusterResult result;
        result.codebook.centroids = distinct;
        result.codebook.centroids.resize(k, distinct.back());
        result.indices.resize(values.size());
        for (size_t i = 0; i < values.size(); ++i)
            result.indices[i] = static_cast<uint32_t>(
                std::lower_bound(distinct.begin(), distinct.end(), values[i]) - distinct.begin());
        result.distortion = 0.0f;
        return result;
    }

    constexpr int kRandomInits = 10;
    constexpr int kLloydSteps = 50;

    ClusterResult best;
    bool have_best = false;
    auto consider = [&](ClusterResult candidate) {
        if (!have_best || candidate.distortion < best.distortion) {
            best = std::move(candidate);
            have_best = true;
        }
    };

    // ten initializations from distinct values sampled without replacement
    for (int init = 0; init < kRandomInits; ++init) {
        SplitMix64 rng{seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(init + 1)};
        std::vector<float> pool = distinct;
        std::vector<float> starts(k);
        for (uint32_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
            starts[i] = pool[i];
        }
        consider(lloyd_run(values, std::move(starts), kLloydSteps));
    }

    // the uniform quantizer grid, refined and as-is; keeping the raw grid as
    // a candidate means the result can never lose to uniform quantization
    const float step = (hi - lo) / static_cast<float>(k - 1);
    std::vector<float> grid(k);
    for (uint32_t j = 0; j < k; ++j)
        grid[j] = static_cast<float>(static_cast<double>(lo) + static_cast<double>(step) * j);
    consider(lloyd_run(values, grid, kLloydSteps));
    consider(lloyd_run(values, grid, 0));

    return best;
}

std::vector<float> codebook_decode(std::span<const uint32_t> indices, const CodeBook& book) {
    std::vector<float> out(indices.size());
    for (size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= book.centroids.size())
            fail(Err::IndexOutOfRange, "codebook_decode: index " + std::to_string(indices[i]) +
                                           " >= " + std::to_string(book.centroids.size()));
        out[i] = book.centroids[indices[i]];
    }
    return out;
}

uint64_t layer_seed(std::string_view layer_name, uint64_t global_seed) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : layer_name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h ^ global_seed;
}

}  // namespace nnc
