#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace speckle {

enum class ErrorCode {
    InvalidArgument,
    AllZero,
    NegativeWeight,
    NonMonotoneInput,
    GridMismatch,
    BeamTooSmall,
    FrameTooLarge,
    InsufficientFrames,
    CenterOutOfBounds,
    ZeroFirstMoment,
    UnnormalizedInput,
    ZeroVariance,
    DivergedLoss,
    EmptyBand,
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Index-carrying variant for NegativeWeight.
class IndexedError : public Error {
public:
    IndexedError(ErrorCode code, std::size_t index, const std::string& what)
        : Error(code, what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Warnings go to stderr unless silenced (tests silence them).
void warn(const std::string& msg);
void set_warnings_enabled(bool enabled);

} // namespace speckle
