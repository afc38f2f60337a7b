#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnc/bitstream.hpp"
#include "nnc/inference.hpp"
#include "nnc/types.hpp"

namespace nnc {

// One row of a rate-distortion sweep: compression factor against Top-k
// accuracy decrease (in percentage points) relative to the uncompressed
// baseline.
struct RDPoint {
    MethodSet method_set = MethodSet::Full;
    int bits = 0;
    uint64_t compressed_bytes = 0;
    double factor = 0.0;
    double top_k = 0.0;
    double loss_pp = 0.0;  // baseline - compressed accuracy, may be negative
    double encode_seconds = 0.0;
    double decode_seconds = 0.0;
};

struct SweepRequest {
    std::vector<int> bits;            // each in [2, 16]
    std::vector<MethodSet> methods;
    uint64_t seed = 0;
    int top_k = 1;
    unsigned workers = 1;
};

// Encode / measure size / decode / evaluate for every (method, bits) pair.
// The baseline accuracy is computed once from the uncompressed model. A
// failing point aborts the sweep with the layer/point context attached.
std::vector<RDPoint> rd_sweep(const NetworkModel& model, const ToyDataset& dataset,
                              const SweepRequest& request);

// Linear interpolation of the compression factor at a given accuracy loss,
// between the two bracketing points of one method's curve (points sorted by
// factor). Throws NotBracketed when the loss level is outside the curve.
double interpolate_factor_at_loss(std::vector<RDPoint> points, double loss_pp);

// CSV with header `method,bits,compressed_bytes,factor,topk,loss_pp`,
// rows ordered by (method, bits ascending), RFC 4180 quoting.
std::string emit_csv(std::vector<RDPoint> points);

const char* method_set_name(MethodSet m);

}  // namespace nnc
