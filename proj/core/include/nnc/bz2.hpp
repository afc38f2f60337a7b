#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace nnc::bz2 {

// BZip2 entropy coder, self-contained implementation of the standard
// format (RLE1 + BWT + MTF + zero-run coding + multi-table Huffman).
// Streams interoperate with the regular bzip2 tool in both directions.

// Compresses into a single .bz2 stream. level selects the block size
// (level * 100k), default 9 like the reference tool.
std::vector<uint8_t> compress(std::span<const uint8_t> data, int level = 9);

// Decompresses one stream. Every malformed input throws a typed
// CodecError(BadEntropyStream); nothing crashes. max_output bounds the
// produced size so corrupted headers cannot balloon memory.
std::vector<uint8_t> decompress(std::span<const uint8_t> data,
                                size_t max_output = std::numeric_limits<size_t>::max());

}  // namespace nnc::bz2
