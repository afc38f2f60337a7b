#pragma once

#include <cstdint>
#include <vector>

#include "nnc/types.hpp"

namespace nnc {

// NNM v1, the uncompressed model container. All integers little-endian.
//
//   "NNM1"
//   u64    header_len
//   header (UTF-8 text, header_len bytes):
//     layers <N>\n
//     arch_meta <arch_len>\n
//     layer <name> <kind> <offset> <byte_len>\n     (N lines, model order)
//   blobs  (concatenated raw little-endian float32, offsets relative
//           to the start of this section, packed in order with no gaps)
//   arch_meta (arch_len opaque bytes)
//
// <kind> is one of
//   conv <h> <w> <c_in> <c_out> | conv1x1 <c_in> <c_out> |
//   dense <rows> <cols> | bias <len> | norm <len>
// Layer names are percent-escaped: bytes <= 0x20, 0x7f and '%' are written
// as %XX (uppercase hex), everything else verbatim.

std::vector<uint8_t> write_model(const NetworkModel& model);

NetworkModel read_model(const std::vector<uint8_t>& bytes);

}  // namespace nnc
