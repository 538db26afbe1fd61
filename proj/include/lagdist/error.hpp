#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lagdist {

enum class ErrorCode {
    InvalidArgument,
    AllNonpositive,
    LengthMismatch,
    NotNormalized,
    ZeroSourceEvents,
    TooShort,
    RankDeficient,
    NonConvergence,
    InfeasibleInput,
    EllDoesNotDivideHour,
    SupportExceedsLags,
    InvalidAtoms,
    EmptyGrid,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every domain failure in the library is reported through this type; the
// code identifies the failure class, what() carries the detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lagdist
