#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"

#include "nnc/bz2.hpp"
#include "nnc/error.hpp"
#include "test_util.hpp"

using namespace nnc;
namespace fs = std::filesystem;

namespace {

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

bool have_bzip2_tool() {
    static int ok = run("bzip2 --help >/dev/null 2>&1");
    return ok == 0;
}

fs::path temp_path(const char* tag) {
    static int counter = 0;
    return fs::temp_directory_path() / ("nnc_bz2_test_" + std::string(tag) + "_" +
                                        std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
}

std::vector<uint8_t> structured_bytes(testutil::Rng& rng, size_t n) {
    // runs, ramps and repeated motifs: the kind of byte stream index packing
    // produces
    std::vector<uint8_t> v;
    v.reserve(n);
    while (v.size() < n) {
        switch (rng.below(3)) {
            case 0: {
                uint8_t b = static_cast<uint8_t>(rng.below(8));
                size_t len = 1 + rng.below(600);
                for (size_t i = 0; i < len && v.size() < n; ++i) v.push_back(b);
                break;
            }
            case 1: {
                size_t len = 1 + rng.below(64);
                for (size_t i = 0; i < len && v.size() < n; ++i)
                    v.push_back(static_cast<uint8_t>(i & 0x1f));
                break;
            }
            default:
                v.push_back(static_cast<uint8_t>(rng.below(256)));
                break;
        }
    }
    return v;
}

}  // namespace

TEST_CASE("round-trip across sizes and shapes") {
    testutil::Rng rng(51);
    for (size_t n : {size_t{0}, size_t{1}, size_t{2}, size_t{5}, size_t{64}, size_t{1000},
                     size_t{4096}, size_t{70000}}) {
        std::vector<uint8_t> data(n);
        for (auto& b : data) b = static_cast<uint8_t>(rng.below(256));
        auto packed = bz2::compress(data);
        CHECK(bz2::decompress(packed) == data);

        auto structured = structured_bytes(rng, n);
        CHECK(bz2::decompress(bz2::compress(structured)) == structured);
    }
}

TEST_CASE("all-equal and long-run inputs survive the RLE path") {
    for (size_t n : {size_t{3}, size_t{4}, size_t{5}, size_t{255}, size_t{256}, size_t{259},
                     size_t{1020}, size_t{100000}}) {
        std::vector<uint8_t> data(n, 0xab);
        CHECK(bz2::decompress(bz2::compress(data)) == data);
    }
    // runs broken by single bytes right at the 4-run threshold
    std::vector<uint8_t> tricky;
    for (int i = 0; i < 300; ++i) {
        for (int j = 0; j < (i % 7); ++j) tricky.push_back('x');
        tricky.push_back(static_cast<uint8_t>(i));
    }
    CHECK(bz2::decompress(bz2::compress(tricky)) == tricky);
}

TEST_CASE("4096 zero bytes compress to under 100 bytes") {
    std::vector<uint8_t> zeros(4096, 0);
    auto packed = bz2::compress(zeros);
    CHECK(packed.size() < 100);

    if (have_bzip2_tool()) {
        // reference tool lands in the same ballpark on the same input
        fs::path in = temp_path("zeros");
        testutil::write_file(in, zeros);
        REQUIRE(run("bzip2 -kf " + in.string()) == 0);
        auto reference = testutil::read_file(in.string() + ".bz2");
        CHECK(reference.size() < 100);
        fs::remove(in);
        fs::remove(in.string() + ".bz2");
    }
}

TEST_CASE("empty input yields a valid empty stream") {
    auto packed = bz2::compress({});
    CHECK(packed.size() == 14);  // header + end-of-stream marker + crc
    CHECK(bz2::decompress(packed).empty());
}

TEST_CASE("external bzip2 decompresses our streams") {
    REQUIRE_MESSAGE(have_bzip2_tool(), "bzip2 tool required for interop tests");
    testutil::Rng rng(52);
    for (size_t n : {size_t{0}, size_t{17}, size_t{5000}, size_t{120000}}) {
        auto data = structured_bytes(rng, n);
        auto packed = bz2::compress(data);

        fs::path in = temp_path("ours");
        fs::path out = temp_path("ours_out");
        testutil::write_file(in, packed);
        REQUIRE(run("bzip2 -dc " + in.string() + " > " + out.string()) == 0);
        CHECK(testutil::read_file(out) == data);
        fs::remove(in);
        fs::remove(out);
    }
}

TEST_CASE("we decompress streams made by external bzip2") {
    REQUIRE_MESSAGE(have_bzip2_tool(), "bzip2 tool required for interop tests");
    testutil::Rng rng(53);
    for (size_t n : {size_t{1}, size_t{333}, size_t{100001}}) {
        auto data = structured_bytes(rng, n);
        fs::path raw = temp_path("theirs");
        testutil::write_file(raw, data);
        REQUIRE(run("bzip2 -zf " + raw.string()) == 0);
        auto packed = testutil::read_file(raw.string() + ".bz2");
        CHECK(bz2::decompress(packed) == data);
        fs::remove(raw.string() + ".bz2");
    }
}

TEST_CASE("multi-block streams at small block sizes") {
    testutil::Rng rng(54);
    auto data = structured_bytes(rng, 350000);
    auto packed = bz2::compress(data, 1);  // 100k blocks -> 4+ blocks
    CHECK(bz2::decompress(packed) == data);

    if (have_bzip2_tool()) {
        fs::path in = temp_path("multi");
        fs::path out = temp_path("multi_out");
        testutil::write_file(in, packed);
        REQUIRE(run("bzip2 -dc " + in.string() + " > " + out.string()) == 0);
        CHECK(testutil::read_file(out) == data);
        fs::remove(in);
        fs::remove(out);
    }
}

TEST_CASE("level is validated") {
    CHECK_THROWS_AS(bz2::compress({}, 0), CodecError);
    CHECK_THROWS_AS(bz2::compress({}, 10), CodecError);
}

TEST_CASE("corrupted streams throw typed errors, never crash") {
    testutil::Rng rng(55);
    auto data = structured_bytes(rng, 3000);
    auto packed = bz2::compress(data);

    for (int trial = 0; trial < 400; ++trial) {
        auto mutated = packed;
        size_t pos = rng.below(mutated.size());
        mutated[pos] ^= static_cast<uint8_t>(1 + rng.below(255));
        try {
            auto out = bz2::decompress(mutated);
            // a flip that leaves the stream decodable must still round-trip
            // honestly through the CRC; reaching here means CRCs matched
            CHECK(out == data);
        } catch (const CodecError& e) {
            CHECK(e.code() == Err::BadEntropyStream);
        }
    }

    // truncations
    for (size_t keep = 0; keep < packed.size(); keep += 7) {
        std::vector<uint8_t> cut(packed.begin(), packed.begin() + keep);
        CHECK_THROWS_AS(bz2::decompress(cut), CodecError);
    }
}

TEST_CASE("max_output bounds the decoder") {
    std::vector<uint8_t> data(10000, 7);
    auto packed = bz2::compress(data);
    CHECK(bz2::decompress(packed, 10000).size() == 10000);
    CHECK_THROWS_AS(bz2::decompress(packed, 9999), CodecError);
    CHECK_THROWS_AS(bz2::decompress(packed, 0), CodecError);
}
