#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace tomocal {

/// Failure categories surfaced by simulators, calibrators and checkers.
enum class ErrorCode {
    InvalidArgument,
    IoError,
    OverlapError,
    DegenerateViewPair,
    DegenerateAngle,
    DegenerateView,
    MarkerOutsideSlab,
    DegeneratePoints,
    ClassificationError,
    NegativeDiscriminant,
    SingularSystem,
    InsufficientViews,
    RankDeficient,
};

const char* to_string(ErrorCode code);

/// Domain error carrying a machine-readable code and, when the failure is
/// tied to a specific view, that view's index.
class CalibError : public std::runtime_error {
public:
    CalibError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    CalibError(ErrorCode code, const std::string& message, int view_index)
        : std::runtime_error(message), code_(code), view_index_(view_index) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<int> view_index() const noexcept { return view_index_; }

private:
    ErrorCode code_;
    std::optional<int> view_index_;
};

}  // namespace tomocal
