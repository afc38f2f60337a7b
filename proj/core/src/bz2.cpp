#include "nnc/bz2.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <numeric>
#include <queue>

#include "nnc/error.hpp"

// Standard BZip2 stream layout:
//
//   "BZh" level                                      stream header
//   per block:
//     0x314159265359 (48)  block CRC (32)  randomized (1)  origPtr (24)
//     used-map L1 (16) + one 16-bit map per present group
//     nGroups (3)  nSelectors (15)  selectors (MTF + unary)
//     per group: 5-bit start length, then +1/-1 deltas per symbol
//     Huffman-coded MTF/zero-run symbols, table switch every 50 symbols
//   0x177245385090 (48)  combined CRC (32)  zero padding to a byte
//
// Data inside a block went through RLE1 (runs of 4..255 stored as four
// literals plus a count byte), the Burrows-Wheeler transform, move-to-front
// and zero-run coding (RUNA/RUNB, bijective base 2). Bits are MSB-first.

namespace nnc::bz2 {
namespace {

constexpr uint64_t kBlockMagic = 0x314159265359ULL;
constexpr uint64_t kEosMagic = 0x177245385090ULL;
constexpr int kGroupSize = 50;
constexpr int kMaxGroups = 6;
constexpr int kMaxAlpha = 258;  // 256 bytes + RUNA/RUNB sharing space with EOB
constexpr int kMaxCodeLen = 20; // accepted when decoding
constexpr int kMaxEncodeLen = 17;
constexpr int kRefineIters = 4;

[[noreturn]] void bad_stream(const std::string& msg) {
    fail(Err::BadEntropyStream, "bzip2: " + msg);
}

// ---------------------------------------------------------------- CRC32
// bzip2 uses the MSB-first variant of CRC-32 (poly 0x04c11db7).

constexpr std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i << 24;
        for (int j = 0; j < 8; ++j)
            c = (c & 0x80000000u) ? (c << 1) ^ 0x04c11db7u : (c << 1);
        table[i] = c;
    }
    return table;
}

constexpr std::array<uint32_t, 256> kCrcTable = make_crc_table();

inline uint32_t crc_update(uint32_t crc, uint8_t byte) {
    return (crc << 8) ^ kCrcTable[((crc >> 24) ^ byte) & 0xffu];
}

// ---------------------------------------------------------------- bit IO

struct BitWriter {
    std::vector<uint8_t> bytes;
    uint64_t acc = 0;
    int nbits = 0;

    void put(uint32_t value, int bits) {
        acc = (acc << bits) | (value & (bits == 32 ? 0xffffffffu : ((1u << bits) - 1)));
        nbits += bits;
        while (nbits >= 8) {
            bytes.push_back(static_cast<uint8_t>(acc >> (nbits - 8)));
            nbits -= 8;
        }
    }

    void put48(uint64_t value) {
        put(static_cast<uint32_t>(value >> 24), 24);
        put(static_cast<uint32_t>(value & 0xffffff), 24);
    }

    void flush() {
        if (nbits > 0) {
            bytes.push_back(static_cast<uint8_t>(acc << (8 - nbits)));
            nbits = 0;
        }
    }
};

struct BitReader {
    std::span<const uint8_t> data;
    size_t byte_pos = 0;
    int bit_pos = 0;  // bits already consumed from data[byte_pos]

    uint32_t read(int bits) {
        uint32_t v = 0;
        while (bits > 0) {
            if (byte_pos >= data.size()) bad_stream("unexpected end of stream");
            int avail = 8 - bit_pos;
            int take = std::min(avail, bits);
            uint32_t chunk = (data[byte_pos] >> (avail - take)) & ((1u << take) - 1);
            v = (v << take) | chunk;
            bits -= take;
            bit_pos += take;
            if (bit_pos == 8) {
                bit_pos = 0;
                ++byte_pos;
            }
        }
        return v;
    }

    void align_to_byte() {
        if (bit_pos != 0) {
            bit_pos = 0;
            ++byte_pos;
        }
    }

    bool at_end() const { return byte_pos >= data.size(); }
};

// ------------------------------------------------------------------ BWT

// Sorts all cyclic rotations (prefix doubling with counting sort) and
// returns the index of the untouched rotation; `last` gets the final
// column of the sorted rotation matrix.
uint32_t bwt_encode(const std::vector<uint8_t>& block, std::vector<uint8_t>& last) {
    const size_t n = block.size();
    std::vector<uint32_t> order(n), classes(n), new_order(n), new_classes(n), count;

    count.assign(256, 0);
    for (uint8_t b : block) ++count[b];
    std::partial_sum(count.begin(), count.end(), count.begin());
    for (size_t i = n; i-- > 0;) order[--count[block[i]]] = static_cast<uint32_t>(i);
    uint32_t n_classes = 0;
    for (size_t i = 0; i < n; ++i) {
        if (i > 0 && block[order[i]] != block[order[i - 1]]) ++n_classes;
        classes[order[i]] = n_classes;
    }
    ++n_classes;

    for (size_t len = 1; len < n && n_classes < n; len <<= 1) {
        // order by second half: shift the previous order left by len
        for (size_t i = 0; i < n; ++i) {
            uint32_t pos = order[i];
            new_order[i] = static_cast<uint32_t>((pos + n - len) % n);
        }
        // stable counting sort by class of the first half
        count.assign(n_classes, 0);
        for (size_t i = 0; i < n; ++i) ++count[classes[new_order[i]]];
        std::partial_sum(count.begin(), count.end(), count.begin());
        for (size_t i = n; i-- > 0;) order[--count[classes[new_order[i]]]] = new_order[i];

        new_classes[order[0]] = 0;
        n_classes = 1;
        for (size_t i = 1; i < n; ++i) {
            uint32_t a = order[i], b = order[i - 1];
            bool differs = classes[a] != classes[b] ||
                           classes[(a + len) % n] != classes[(b + len) % n];
            if (differs) ++n_classes;
            new_classes[a] = n_classes - 1;
        }
        classes.swap(new_classes);
    }

    last.resize(n);
    uint32_t orig_ptr = 0;
    for (size_t i = 0; i < n; ++i) {
        uint32_t start = order[i];
        last[i] = block[(start + n - 1) % n];
        if (start == 0) orig_ptr = static_cast<uint32_t>(i);
    }
    return orig_ptr;
}

// ---------------------------------------------------------- Huffman side

// Code lengths from frequencies, capped at max_len by repeatedly halving
// the weights the way the reference encoder does.
void make_code_lengths(uint8_t* lengths, const uint32_t* freq, int alpha, int max_len) {
    std::vector<uint64_t> weight(alpha);
    for (int i = 0; i < alpha; ++i) weight[i] = freq[i] == 0 ? 1 : freq[i];

    while (true) {
        // nodes: [0, alpha) leaves, then internal nodes
        std::vector<uint64_t> w(weight);
        std::vector<int> parent(alpha, -1);
        using Node = std::pair<uint64_t, int>;
        std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
        for (int i = 0; i < alpha; ++i) heap.push({w[i], i});

        while (heap.size() > 1) {
            auto [wa, a] = heap.top();
            heap.pop();
            auto [wb, b] = heap.top();
            heap.pop();
            int id = static_cast<int>(w.size());
            w.push_back(wa + wb);
            parent.push_back(-1);
            parent[a] = id;
            parent[b] = id;
            heap.push({wa + wb, id});
        }

        int deepest = 0;
        for (int i = 0; i < alpha; ++i) {
            int depth = 0;
            for (int p = parent[i]; p != -1; p = parent[p]) ++depth;
            lengths[i] = static_cast<uint8_t>(depth);
            deepest = std::max(deepest, depth);
        }
        if (deepest <= max_len) return;
        for (int i = 0; i < alpha; ++i) weight[i] = 1 + weight[i] / 2;
    }
}

// Canonical code assignment ordered by (length, symbol).
void assign_codes(uint32_t* codes, const uint8_t* lengths, int alpha) {
    int min_len = kMaxCodeLen + 1, max_len = 0;
    for (int i = 0; i < alpha; ++i) {
        min_len = std::min(min_len, static_cast<int>(lengths[i]));
        max_len = std::max(max_len, static_cast<int>(lengths[i]));
    }
    uint32_t vec = 0;
    for (int n = min_len; n <= max_len; ++n) {
        for (int i = 0; i < alpha; ++i)
            if (lengths[i] == n) codes[i] = vec++;
        vec <<= 1;
    }
}

struct HuffDecoder {
    int min_len = 0, max_len = 0;
    std::array<uint32_t, kMaxCodeLen + 2> first_code{};
    std::array<uint32_t, kMaxCodeLen + 2> sym_count{};
    std::array<uint32_t, kMaxCodeLen + 2> perm_base{};
    std::vector<uint16_t> perm;

    void build(const uint8_t* lengths, int alpha) {
        min_len = kMaxCodeLen;
        max_len = 1;
        first_code.fill(0);
        sym_count.fill(0);
        perm_base.fill(0);
        perm.clear();
        for (int i = 0; i < alpha; ++i) {
            ++sym_count[lengths[i]];
            min_len = std::min(min_len, static_cast<int>(lengths[i]));
            max_len = std::max(max_len, static_cast<int>(lengths[i]));
        }
        uint32_t vec = 0;
        for (int l = min_len; l <= max_len; ++l) {
            first_code[l] = vec;
            perm_base[l] = static_cast<uint32_t>(perm.size());
            for (int i = 0; i < alpha; ++i)
                if (lengths[i] == l) perm.push_back(static_cast<uint16_t>(i));
            vec = (vec + sym_count[l]) << 1;
        }
    }

    uint16_t decode(BitReader& br) const {
        uint32_t v = br.read(min_len);
        for (int l = min_len;; ) {
            if (sym_count[l] > 0 && v >= first_code[l] && v - first_code[l] < sym_count[l])
                return perm[perm_base[l] + (v - first_code[l])];
            if (++l > max_len) bad_stream("invalid Huffman code");
            v = (v << 1) | br.read(1);
        }
    }
};

// ------------------------------------------------------------- encoder

struct Rle1Chunk {
    std::vector<uint8_t> block;  // post-RLE1 bytes, fed to the BWT
    size_t consumed = 0;
    uint32_t crc = 0;  // over the consumed original bytes
};

Rle1Chunk rle1_fill(std::span<const uint8_t> data, size_t pos, size_t capacity) {
    Rle1Chunk chunk;
    chunk.block.reserve(std::min(capacity, data.size() - pos + 8));
    uint32_t crc = 0xffffffffu;
    size_t i = pos;
    // a run unit needs at most 5 bytes; never split one across blocks
    while (i < data.size() && chunk.block.size() + 5 <= capacity) {
        uint8_t b = data[i];
        size_t run = 1;
        while (run < 255 && i + run < data.size() && data[i + run] == b) ++run;
        if (run >= 4) {
            chunk.block.insert(chunk.block.end(), 4, b);
            chunk.block.push_back(static_cast<uint8_t>(run - 4));
        } else {
            chunk.block.insert(chunk.block.end(), run, b);
        }
        for (size_t r = 0; r < run; ++r) crc = crc_update(crc, b);
        i += run;
    }
    chunk.consumed = i - pos;
    chunk.crc = ~crc;
    return chunk;
}

void encode_block(BitWriter& bw, const std::vector<uint8_t>& block, uint32_t block_crc) {
    bw.put48(kBlockMagic);
    bw.put(block_crc, 32);
    bw.put(0, 1);  // randomized: obsolete, always 0

    std::vector<uint8_t> last;
    uint32_t orig_ptr = bwt_encode(block, last);
    bw.put(orig_ptr, 24);

    // move-to-front over the used byte values, zero runs in bijective base 2
    std::array<bool, 256> used{};
    for (uint8_t b : block) used[b] = true;
    std::array<uint8_t, 256> rank_of{};
    int n_used = 0;
    for (int b = 0; b < 256; ++b)
        if (used[b]) rank_of[b] = static_cast<uint8_t>(n_used++);

    const int alpha = n_used + 2;
    const uint16_t eob = static_cast<uint16_t>(alpha - 1);
    std::vector<uint16_t> syms;
    syms.reserve(last.size() / 2 + 16);
    std::array<uint8_t, 256> mtf{};
    for (int i = 0; i < n_used; ++i) mtf[i] = static_cast<uint8_t>(i);

    uint64_t zero_run = 0;
    auto flush_zero_run = [&] {
        if (zero_run == 0) return;
        uint64_t z = zero_run - 1;
        while (true) {
            syms.push_back(static_cast<uint16_t>(z & 1));  // RUNA = 0, RUNB = 1
            if (z < 2) break;
            z = (z - 2) / 2;
        }
        zero_run = 0;
    };

    for (uint8_t b : last) {
        uint8_t r = rank_of[b];
        int pos = 0;
        while (mtf[pos] != r) ++pos;
        if (pos == 0) {
            ++zero_run;
            continue;
        }
        flush_zero_run();
        syms.push_back(static_cast<uint16_t>(pos + 1));
        std::memmove(&mtf[1], &mtf[0], pos);
        mtf[0] = r;
    }
    flush_zero_run();
    syms.push_back(eob);

    const size_t n_syms = syms.size();
    std::array<uint32_t, kMaxAlpha> freq{};
    for (uint16_t s : syms) ++freq[s];

    int n_groups = n_syms < 200 ? 2 : n_syms < 600 ? 3 : n_syms < 1200 ? 4 : n_syms < 2400 ? 5 : 6;

    // coarse initial tables: each covers a contiguous band of roughly equal
    // frequency mass (cheap symbols inside the band, expensive outside)
    std::array<std::array<uint8_t, kMaxAlpha>, kMaxGroups> len{};
    {
        int n_part = n_groups, gs = 0;
        int64_t rem_f = static_cast<int64_t>(n_syms);
        while (n_part > 0) {
            int64_t t_freq = rem_f / n_part;
            int ge = gs - 1;
            int64_t a_freq = 0;
            while (a_freq < t_freq && ge < alpha - 1) a_freq += freq[++ge];
            if (ge > gs && n_part != n_groups && n_part != 1 && ((n_groups - n_part) % 2 == 1))
                a_freq -= freq[ge--];
            for (int v = 0; v < alpha; ++v)
                len[n_part - 1][v] = (v >= gs && v <= ge) ? 0 : 15;
            --n_part;
            gs = ge + 1;
            rem_f -= a_freq;
        }
    }

    // refine: assign each 50-symbol chunk to its cheapest table, then
    // rebuild table code lengths from what was actually assigned to them
    std::vector<uint8_t> selectors;
    for (int iter = 0; iter < kRefineIters; ++iter) {
        std::array<std::array<uint32_t, kMaxAlpha>, kMaxGroups> rfreq{};
        selectors.clear();
        for (size_t gs = 0; gs < n_syms; gs += kGroupSize) {
            size_t ge = std::min(gs + kGroupSize, n_syms);
            std::array<uint32_t, kMaxGroups> cost{};
            for (size_t i = gs; i < ge; ++i)
                for (int t = 0; t < n_groups; ++t) cost[t] += len[t][syms[i]];
            int best = 0;
            for (int t = 1; t < n_groups; ++t)
                if (cost[t] < cost[best]) best = t;
            selectors.push_back(static_cast<uint8_t>(best));
            for (size_t i = gs; i < ge; ++i) ++rfreq[best][syms[i]];
        }
        for (int t = 0; t < n_groups; ++t)
            make_code_lengths(len[t].data(), rfreq[t].data(), alpha, kMaxEncodeLen);
    }
    if (selectors.size() >= 32768) bad_stream("selector overflow");

    std::array<std::array<uint32_t, kMaxAlpha>, kMaxGroups> codes{};
    for (int t = 0; t < n_groups; ++t) assign_codes(codes[t].data(), len[t].data(), alpha);

    // symbol bitmap, two levels of 16
    uint32_t l1 = 0;
    for (int g = 0; g < 16; ++g)
        for (int b = 0; b < 16; ++b)
            if (used[g * 16 + b]) l1 |= 1u << (15 - g);
    bw.put(l1, 16);
    for (int g = 0; g < 16; ++g) {
        if (!(l1 & (1u << (15 - g)))) continue;
        uint32_t l2 = 0;
        for (int b = 0; b < 16; ++b)
            if (used[g * 16 + b]) l2 |= 1u << (15 - b);
        bw.put(l2, 16);
    }

    bw.put(static_cast<uint32_t>(n_groups), 3);
    bw.put(static_cast<uint32_t>(selectors.size()), 15);

    // selectors, move-to-front then unary
    std::array<uint8_t, kMaxGroups> sel_mtf{};
    for (int t = 0; t < n_groups; ++t) sel_mtf[t] = static_cast<uint8_t>(t);
    for (uint8_t s : selectors) {
        int pos = 0;
        while (sel_mtf[pos] != s) ++pos;
        std::memmove(&sel_mtf[1], &sel_mtf[0], pos);
        sel_mtf[0] = s;
        for (int i = 0; i < pos; ++i) bw.put(1, 1);
        bw.put(0, 1);
    }

    // code lengths, 5-bit start then +1/-1 deltas
    for (int t = 0; t < n_groups; ++t) {
        int curr = len[t][0];
        bw.put(static_cast<uint32_t>(curr), 5);
        for (int s = 0; s < alpha; ++s) {
            while (curr < len[t][s]) {
                bw.put(2, 2);  // 10: increment
                ++curr;
            }
            while (curr > len[t][s]) {
                bw.put(3, 2);  // 11: decrement
                --curr;
            }
            bw.put(0, 1);
        }
    }

    // the payload, switching tables every 50 symbols
    size_t sel_idx = 0;
    for (size_t gs = 0; gs < n_syms; gs += kGroupSize) {
        size_t ge = std::min(gs + kGroupSize, n_syms);
        int t = selectors[sel_idx++];
        for (size_t i = gs; i < ge; ++i) bw.put(codes[t][syms[i]], len[t][syms[i]]);
    }
}

// ------------------------------------------------------------- decoder

struct BlockDecodeState {
    std::vector<uint8_t> dbuf;      // BWT last column
    std::vector<uint32_t> next;     // inverse-BWT successor vector
    std::array<uint32_t, 256> byte_count{};
};

uint32_t decode_block(BitReader& br, size_t block_cap, std::vector<uint8_t>& out,
                      size_t max_output, BlockDecodeState& state) {
    uint32_t block_crc = br.read(32);
    if (br.read(1)) bad_stream("randomized blocks are deprecated and unsupported");
    uint32_t orig_ptr = br.read(24);

    std::array<uint8_t, 256> sym_to_byte{};
    int n_used = 0;
    uint32_t l1 = br.read(16);
    for (int g = 0; g < 16; ++g) {
        if (!(l1 & (1u << (15 - g)))) continue;
        uint32_t l2 = br.read(16);
        for (int b = 0; b < 16; ++b)
            if (l2 & (1u << (15 - b))) sym_to_byte[n_used++] = static_cast<uint8_t>(g * 16 + b);
    }
    if (n_used == 0) bad_stream("empty symbol map");
    const int alpha = n_used + 2;
    const uint16_t eob = static_cast<uint16_t>(alpha - 1);

    uint32_t n_groups = br.read(3);
    if (n_groups < 2 || n_groups > kMaxGroups) bad_stream("invalid Huffman group count");
    uint32_t n_selectors = br.read(15);
    if (n_selectors == 0) bad_stream("no selectors");

    std::vector<uint8_t> selectors(n_selectors);
    std::array<uint8_t, kMaxGroups> sel_mtf{};
    for (uint32_t t = 0; t < n_groups; ++t) sel_mtf[t] = static_cast<uint8_t>(t);
    for (uint32_t i = 0; i < n_selectors; ++i) {
        int j = 0;
        while (br.read(1)) {
            if (++j >= static_cast<int>(n_groups)) bad_stream("selector out of range");
        }
        uint8_t s = sel_mtf[j];
        std::memmove(&sel_mtf[1], &sel_mtf[0], j);
        sel_mtf[0] = s;
        selectors[i] = s;
    }

    std::array<HuffDecoder, kMaxGroups> tables;
    for (uint32_t t = 0; t < n_groups; ++t) {
        std::array<uint8_t, kMaxAlpha> lengths{};
        uint32_t curr = br.read(5);
        for (int s = 0; s < alpha; ++s) {
            while (true) {
                if (curr < 1 || curr > kMaxCodeLen) bad_stream("code length out of range");
                if (!br.read(1)) break;
                curr += br.read(1) ? -1 : 1;
            }
            lengths[s] = static_cast<uint8_t>(curr);
        }
        tables[t].build(lengths.data(), alpha);
    }

    // Huffman + zero-run + MTF decode into the BWT buffer
    state.dbuf.clear();
    state.dbuf.reserve(std::min(block_cap, size_t{1} << 16));
    state.byte_count.fill(0);
    std::array<uint8_t, 256> mtf{};
    for (int i = 0; i < n_used; ++i) mtf[i] = static_cast<uint8_t>(i);

    uint64_t run_len = 0, run_bit = 0;
    size_t sel_idx = 0;
    int group_left = 0;
    const HuffDecoder* table = nullptr;

    auto flush_run = [&] {
        if (run_bit == 0) return;
        if (state.dbuf.size() + run_len > block_cap) bad_stream("run exceeds block size");
        uint8_t byte = sym_to_byte[mtf[0]];
        state.byte_count[byte] += static_cast<uint32_t>(run_len);
        state.dbuf.insert(state.dbuf.end(), run_len, byte);
        run_len = run_bit = 0;
    };

    while (true) {
        if (group_left == 0) {
            if (sel_idx >= selectors.size()) bad_stream("ran out of selectors");
            table = &tables[selectors[sel_idx++]];
            group_left = kGroupSize;
        }
        --group_left;
        uint16_t sym = table->decode(br);

        if (sym <= 1) {  // RUNA / RUNB
            if (run_bit == 0) {
                run_bit = 1;
                run_len = 0;
            }
            run_len += run_bit << sym;
            run_bit <<= 1;
            if (run_len > block_cap) bad_stream("run exceeds block size");
            continue;
        }
        flush_run();
        if (sym == eob) break;

        int pos = sym - 1;  // 1..n_used-1: positions past the front of the MTF list
        if (pos >= n_used) bad_stream("MTF index out of range");
        uint8_t r = mtf[pos];
        std::memmove(&mtf[1], &mtf[0], pos);
        mtf[0] = r;
        uint8_t byte = sym_to_byte[r];
        if (state.dbuf.size() + 1 > block_cap) bad_stream("block data exceeds block size");
        ++state.byte_count[byte];
        state.dbuf.push_back(byte);
    }

    const size_t n = state.dbuf.size();
    if (n == 0) bad_stream("empty block");
    if (orig_ptr >= n) bad_stream("origPtr out of range");

    // inverse BWT: next[] walks the rows in original order
    std::array<uint32_t, 256> cum{};
    uint32_t total = 0;
    for (int b = 0; b < 256; ++b) {
        cum[b] = total;
        total += state.byte_count[b];
    }
    state.next.resize(n);
    for (size_t i = 0; i < n; ++i) state.next[cum[state.dbuf[i]]++] = static_cast<uint32_t>(i);

    // walk and undo RLE1, checking the CRC over the reconstructed bytes
    uint32_t crc = 0xffffffffu;
    uint32_t pos = state.next[orig_ptr];
    int run = 0, prev = -1;
    for (size_t k = 0; k < n; ++k) {
        uint8_t b = state.dbuf[pos];
        pos = state.next[pos];
        if (run == 4) {
            if (out.size() + b > max_output) bad_stream("output exceeds expected size");
            out.insert(out.end(), b, static_cast<uint8_t>(prev));
            for (int r = 0; r < b; ++r) crc = crc_update(crc, static_cast<uint8_t>(prev));
            run = 0;
            prev = -1;
            continue;
        }
        if (out.size() + 1 > max_output) bad_stream("output exceeds expected size");
        out.push_back(b);
        crc = crc_update(crc, b);
        if (b == prev) {
            ++run;
        } else {
            prev = b;
            run = 1;
        }
    }
    if (~crc != block_crc) bad_stream("block CRC mismatch");
    return block_crc;
}

}  // namespace

std::vector<uint8_t> compress(std::span<const uint8_t> data, int level) {
    if (level < 1 || level > 9) fail(Err::BadConfig, "bzip2 level must be in [1, 9]");
    const size_t block_cap = static_cast<size_t>(level) * 100000;

    BitWriter bw;
    bw.put('B', 8);
    bw.put('Z', 8);
    bw.put('h', 8);
    bw.put(static_cast<uint32_t>('0' + level), 8);

    uint32_t combined = 0;
    size_t pos = 0;
    while (pos < data.size()) {
        Rle1Chunk chunk = rle1_fill(data, pos, block_cap);
        pos += chunk.consumed;
        combined = ((combined << 1) | (combined >> 31)) ^ chunk.crc;
        encode_block(bw, chunk.block, chunk.crc);
    }

    bw.put48(kEosMagic);
    bw.put(combined, 32);
    bw.flush();
    return std::move(bw.bytes);
}

std::vector<uint8_t> decompress(std::span<const uint8_t> data, size_t max_output) {
    BitReader br{data};
    if (br.read(8) != 'B' || br.read(8) != 'Z' || br.read(8) != 'h')
        bad_stream("missing BZh header");
    uint32_t level = br.read(8);
    if (level < '1' || level > '9') bad_stream("invalid block-size digit");
    const size_t block_cap = static_cast<size_t>(level - '0') * 100000;

    std::vector<uint8_t> out;
    BlockDecodeState state;
    uint32_t combined = 0;
    while (true) {
        uint64_t magic = (static_cast<uint64_t>(br.read(24)) << 24) | br.read(24);
        if (magic == kEosMagic) {
            uint32_t stored = br.read(32);
            if (stored != combined) bad_stream("stream CRC mismatch");
            break;
        }
        if (magic != kBlockMagic) bad_stream("bad block magic");
        uint32_t block_crc = decode_block(br, block_cap, out, max_output, state);
        combined = ((combined << 1) | (combined >> 31)) ^ block_crc;
    }
    br.align_to_byte();
    if (!br.at_end()) bad_stream("trailing bytes after end of stream");
    return out;
}

}  // namespace nnc::bz2
