#pragma once

#include <stdexcept>
#include <string>

namespace nnc {

// Every failure in the library surfaces as a CodecError carrying one of
// these codes. Parsers in particular must map *any* malformed input to a
// typed error instead of crashing or asserting.
enum class Err {
    // model container (NNM)
    BadMagic,
    MalformedHeader,
    TruncatedBlob,
    NonFiniteValue,
    DuplicateLayerName,
    InvalidModel,

    // transforms / quantization / clustering
    WrongKind,
    EmptyInput,
    NonFiniteInput,
    BadConfig,
    IndexOutOfRange,
    ArrangementMismatch,

    // compressed container (NNC) and entropy coding
    UnsupportedVersion,
    TruncatedRecord,
    PayloadLengthMismatch,
    MalformedRecord,
    BadEntropyStream,
    ZeroCompressedSize,

    // toy inference and sweep harness
    ShapeMismatch,
    UnknownLayer,
    MalformedGraph,
    EmptyDataset,
    NotBracketed,

    IoError,
};

const char* err_name(Err code);

class CodecError : public std::runtime_error {
public:
    CodecError(Err code, const std::string& msg)
        : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}

    Err code() const noexcept { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) {
    throw CodecError(code, msg);
}

}  // namespace nnc
