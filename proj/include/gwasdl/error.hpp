#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwasdl {

enum class ErrorCode {
    BadMagic,
    SampleMajorUnsupported,
    TruncatedPayload,
    MalformedBim,
    MalformedFam,
    NonIntegralDosage,
    HeaderMismatch,
    DuplicateSampleId,
    NoLabeledSamples,
    StratumTooSmall,
    SpecInvalid,
    BisectionFailed,
    SingularSystem,
    DegenerateLabels,
    ConvergenceFailure,
    EmptySelection,
    ShapeMismatch,
    NoForwardRecorded,
    ConfigInvalid,
    AllMissing,
    UntrainedModel,
    KTooLarge,
    IoFailure,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type; the
// code lets callers (and the CLI exit-code mapping) branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace gwasdl
