// Regenerates the implementation-defined golden fixture
// (tests/fixtures/golden_2layer_n5.nnc). Run manually when the NNC layout
// changes on purpose; the independent checker script must still accept the
// result:  python3 scripts/check_nnc.py tests/fixtures/golden_2layer_n5.nnc

#include <cstdio>

#include "nnc/codec.hpp"
#include "golden_model.hpp"
#include "test_util.hpp"

int main(int argc, char** argv) {
    std::filesystem::path dir =
        argc > 1 ? std::filesystem::path(argv[1]) : testutil::fixture_dir();
    nnc::NetworkModel model = testutil::golden_two_layer_model();
    nnc::CompressedModel compressed =
        nnc::encode_network(model, nnc::QuantizerConfig{testutil::kGoldenBits},
                            testutil::kGoldenSeed, nnc::MethodSet::Full);
    auto bytes = nnc::write_compressed(compressed);
    auto path = dir / "golden_2layer_n5.nnc";
    testutil::write_file(path, bytes);
    std::printf("wrote %s (%zu bytes)\n", path.c_str(), bytes.size());
    return 0;
}
