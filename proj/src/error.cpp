#include "gwasdl/error.hpp"

namespace gwasdl {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::SampleMajorUnsupported: return "SampleMajorUnsupported";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::MalformedBim: return "MalformedBim";
        case ErrorCode::MalformedFam: return "MalformedFam";
        case ErrorCode::NonIntegralDosage: return "NonIntegralDosage";
        case ErrorCode::HeaderMismatch: return "HeaderMismatch";
        case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
        case ErrorCode::NoLabeledSamples: return "NoLabeledSamples";
        case ErrorCode::StratumTooSmall: return "StratumTooSmall";
        case ErrorCode::SpecInvalid: return "SpecInvalid";
        case ErrorCode::BisectionFailed: return "BisectionFailed";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::EmptySelection: return "EmptySelection";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NoForwardRecorded: return "NoForwardRecorded";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::AllMissing: return "AllMissing";
        case ErrorCode::UntrainedModel: return "UntrainedModel";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace gwasdl
