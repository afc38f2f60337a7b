#include "doctest.h"

#include "nnc/model_io.hpp"
#include "test_util.hpp"

using namespace nnc;

namespace {

NetworkModel one_bias_model() {
    NetworkModel m;
    LayerParams layer;
    layer.name = "b";
    layer.kind = ParamKind::bias(2);
    layer.tensor.shape = {2};
    layer.tensor.values = {0.5f, -1.0f};
    m.layers.push_back(layer);
    return m;
}

}  // namespace

TEST_CASE("single bias layer round-trips bit-exactly") {
    NetworkModel m = one_bias_model();
    NetworkModel back = read_model(write_model(m));
    CHECK(back == m);
    CHECK(back.layers[0].tensor.values[0] == 0.5f);
    CHECK(back.layers[0].tensor.values[1] == -1.0f);
}

TEST_CASE("bad magic is rejected") {
    std::vector<uint8_t> bytes = write_model(one_bias_model());
    bytes[0] = 'X';
    bytes[1] = 'X';
    CHECK_THROWS_WITH_AS(read_model(bytes), doctest::Contains("BadMagic"), CodecError);
    try {
        read_model(bytes);
    } catch (const CodecError& e) {
        CHECK(e.code() == Err::BadMagic);
    }
}

TEST_CASE("fixture container written by the reference script is byte-stable") {
    // write_model(read_model(B)) == B for the 3-layer fixture
    auto bytes = testutil::read_file(testutil::fixture_dir() / "roundtrip3.nnm");
    NetworkModel m = read_model(bytes);
    REQUIRE(m.layers.size() == 3);
    CHECK(m.layers[0].name == "conv a");  // exercises the %20 escape
    CHECK(m.layers[1].name == "bias%b");
    CHECK(m.layers[1].tensor.values[0] == 0.5f);
    CHECK(m.layers[2].kind.tag == ParamKindTag::DenseMatrix);
    std::vector<uint8_t> rewritten = write_model(m);
    CHECK(rewritten == bytes);
}

TEST_CASE("random mixed-kind models round-trip") {
    testutil::Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        NetworkModel m = testutil::random_model(rng, 5);
        NetworkModel back = read_model(write_model(m));
        CHECK(back == m);
    }
}

TEST_CASE("write_model is deterministic") {
    testutil::Rng rng(7);
    NetworkModel m = testutil::random_model(rng, 4);
    CHECK(write_model(m) == write_model(m));
}

TEST_CASE("invalid models are rejected on write") {
    NetworkModel empty;
    CHECK_THROWS_AS(write_model(empty), CodecError);

    NetworkModel dup = one_bias_model();
    dup.layers.push_back(dup.layers[0]);
    try {
        write_model(dup);
        FAIL("expected DuplicateLayerName");
    } catch (const CodecError& e) {
        CHECK(e.code() == Err::DuplicateLayerName);
    }

    NetworkModel nan_model = one_bias_model();
    nan_model.layers[0].tensor.values[1] = std::numeric_limits<float>::quiet_NaN();
    try {
        write_model(nan_model);
        FAIL("expected NonFiniteValue");
    } catch (const CodecError& e) {
        CHECK(e.code() == Err::NonFiniteValue);
    }
}

TEST_CASE("NaN inside a stored blob is rejected on read") {
    std::vector<uint8_t> bytes = write_model(one_bias_model());
    // header length lives at offset 4; blobs start right after the header
    uint64_t header_len = 0;
    for (int i = 0; i < 8; ++i) header_len |= static_cast<uint64_t>(bytes[4 + i]) << (8 * i);
    size_t blob_at = 12 + header_len;
    bytes[blob_at + 0] = 0x00;
    bytes[blob_at + 1] = 0x00;
    bytes[blob_at + 2] = 0xc0;
    bytes[blob_at + 3] = 0x7f;  // quiet NaN
    try {
        read_model(bytes);
        FAIL("expected NonFiniteValue");
    } catch (const CodecError& e) {
        CHECK(e.code() == Err::NonFiniteValue);
    }
}

TEST_CASE("truncated files fail with typed errors") {
    std::vector<uint8_t> bytes = write_model(one_bias_model());
    for (size_t keep : {bytes.size() - 1, bytes.size() - 5, size_t{10}, size_t{3}}) {
        std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + keep);
        CHECK_THROWS_AS(read_model(cut), CodecError);
    }
}

TEST_CASE("arch_meta passes through unmodified") {
    NetworkModel m = one_bias_model();
    m.arch_meta = {0x00, 0x01, 0xff, 0xfe, '\n', '%', ' '};
    NetworkModel back = read_model(write_model(m));
    CHECK(back.arch_meta == m.arch_meta);
}
