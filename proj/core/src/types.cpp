#include "nnc/types.hpp"

#include <cmath>
#include <unordered_set>

namespace nnc {

const char* err_name(Err code) {
    switch (code) {
        case Err::BadMagic: return "BadMagic";
        case Err::MalformedHeader: return "MalformedHeader";
        case Err::TruncatedBlob: return "TruncatedBlob";
        case Err::NonFiniteValue: return "NonFiniteValue";
        case Err::DuplicateLayerName: return "DuplicateLayerName";
        case Err::InvalidModel: return "InvalidModel";
        case Err::WrongKind: return "WrongKind";
        case Err::EmptyInput: return "EmptyInput";
        case Err::NonFiniteInput: return "NonFiniteInput";
        case Err::BadConfig: return "BadConfig";
        case Err::IndexOutOfRange: return "IndexOutOfRange";
        case Err::ArrangementMismatch: return "ArrangementMismatch";
        case Err::UnsupportedVersion: return "UnsupportedVersion";
        case Err::TruncatedRecord: return "TruncatedRecord";
        case Err::PayloadLengthMismatch: return "PayloadLengthMismatch";
        case Err::MalformedRecord: return "MalformedRecord";
        case Err::BadEntropyStream: return "BadEntropyStream";
        case Err::ZeroCompressedSize: return "ZeroCompressedSize";
        case Err::ShapeMismatch: return "ShapeMismatch";
        case Err::UnknownLayer: return "UnknownLayer";
        case Err::MalformedGraph: return "MalformedGraph";
        case Err::EmptyDataset: return "EmptyDataset";
        case Err::NotBracketed: return "NotBracketed";
        case Err::IoError: return "IoError";
    }
    return "UnknownError";
}

size_t kind_dim_count(ParamKindTag tag) {
    switch (tag) {
        case ParamKindTag::ConvKernel: return 4;
        case ParamKindTag::Conv1x1: return 2;
        case ParamKindTag::DenseMatrix: return 2;
        case ParamKindTag::BiasVector: return 1;
        case ParamKindTag::NormalizationVector: return 1;
    }
    return 0;
}

void validate_model(const NetworkModel& model) {
    if (model.layers.empty()) fail(Err::InvalidModel, "model has no layers");

    std::unordered_set<std::string> names;
    for (const LayerParams& layer : model.layers) {
        if (layer.name.empty()) fail(Err::InvalidModel, "layer with empty name");
        if (!names.insert(layer.name).second)
            fail(Err::DuplicateLayerName, "duplicate layer name '" + layer.name + "'");

        const ParamKind& kind = layer.kind;
        if (kind.dims.size() != kind_dim_count(kind.tag))
            fail(Err::InvalidModel, "layer '" + layer.name + "': wrong dim count for kind");
        for (uint32_t d : kind.dims)
            if (d == 0) fail(Err::InvalidModel, "layer '" + layer.name + "': zero dimension");
        if (kind.tag == ParamKindTag::ConvKernel && kind.dims[0] <= 1 && kind.dims[1] <= 1)
            fail(Err::InvalidModel,
                 "layer '" + layer.name + "': ConvKernel needs a spatial extent, use conv1x1");

        const TensorF32& t = layer.tensor;
        if (t.shape.empty()) fail(Err::InvalidModel, "layer '" + layer.name + "': empty shape");
        for (uint32_t d : t.shape)
            if (d == 0) fail(Err::InvalidModel, "layer '" + layer.name + "': zero tensor dim");
        if (t.element_count() != t.values.size())
            fail(Err::InvalidModel, "layer '" + layer.name + "': shape/value count mismatch");
        if (t.element_count() != kind.element_count())
            fail(Err::InvalidModel, "layer '" + layer.name + "': kind/tensor size mismatch");
        for (float v : t.values)
            if (!std::isfinite(v))
                fail(Err::NonFiniteValue, "layer '" + layer.name + "': NaN or Inf value");
    }
}

}  // namespace nnc
