#include "subdiff/error.hpp"

namespace subdiff {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Domain: return "Domain";
        case ErrorCode::OrthogonalityViolation: return "OrthogonalityViolation";
        case ErrorCode::NearCriticalDenominator: return "NearCriticalDenominator";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::BadGeometry: return "BadGeometry";
        case ErrorCode::Underflow: return "Underflow";
        case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& what,
                     std::optional<std::size_t> mode) {
    std::string msg = std::string(to_string(code)) + ": " + what;
    if (mode) msg += " (mode k=" + std::to_string(*mode + 1) + ")";
    return msg;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& what,
             std::optional<std::size_t> mode)
    : std::runtime_error(decorate(code, what, mode)), code_(code), mode_(mode) {}

void fail(ErrorCode code, const std::string& what,
          std::optional<std::size_t> mode) {
    throw Error(code, what, mode);
}

}  // namespace subdiff
