#include "speckle/error.hpp"

#include <atomic>
#include <iostream>

namespace speckle {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonMonotoneInput: return "NonMonotoneInput";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::BeamTooSmall: return "BeamTooSmall";
    case ErrorCode::FrameTooLarge: return "FrameTooLarge";
    case ErrorCode::InsufficientFrames: return "InsufficientFrames";
    case ErrorCode::CenterOutOfBounds: return "CenterOutOfBounds";
    case ErrorCode::ZeroFirstMoment: return "ZeroFirstMoment";
    case ErrorCode::UnnormalizedInput: return "UnnormalizedInput";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

namespace {
std::atomic<bool> g_warnings{true};
}

void warn(const std::string& msg) {
    if (g_warnings.load())
        std::cerr << "warning: " << msg << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled); }

} // namespace speckle
