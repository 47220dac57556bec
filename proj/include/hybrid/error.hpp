#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hybrid {

/// Every failure the library reports. The category decides the CLI exit code.
enum class ErrorCode {
    // numerical
    SingularAmplitude,
    NoConvergence,
    StepCollapse,
    StepTooCoarse,
    NonFinite,
    // data
    InvalidArgument,
    FoldCountUnexpected,
    MissingFolds,
    MissingFeature,
    DegenerateFeature,
    InsufficientSamples,
    TooManyRejections,
    SweepFeatureMismatch,
    EmptyInput,
    ParseError,
};

enum class ErrorCategory { numerical, data };

[[nodiscard]] constexpr ErrorCategory category_of(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SingularAmplitude:
        case ErrorCode::NoConvergence:
        case ErrorCode::StepCollapse:
        case ErrorCode::StepTooCoarse:
        case ErrorCode::NonFinite:
            return ErrorCategory::numerical;
        default:
            return ErrorCategory::data;
    }
}

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] ErrorCategory category() const noexcept { return category_of(code_); }

private:
    ErrorCode code_;
};

}  // namespace hybrid
