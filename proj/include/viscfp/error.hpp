#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace viscfp {

enum class ErrorCode {
    DimensionMismatch,
    InvalidVector,
    InvalidSpec,
    NotLinear,
    NoConvergence,
    NotAContraction,
    NotNonexpansive,
    MaxIterExceeded,
    InvalidSchedule,
    NonDecreasingSchedule,
    NotAFixedPoint,
    IoError,
    ConfigInvalid,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure the library reports carries one of
/// the codes above so callers (the CLI in particular) can map it to an exit
/// status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace viscfp
