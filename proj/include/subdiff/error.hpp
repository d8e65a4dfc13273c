#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace subdiff {

enum class ErrorCode {
    InvalidArgument,
    Domain,
    OrthogonalityViolation,
    NearCriticalDenominator,
    DegenerateDenominator,
    BadGeometry,
    Underflow,
    Config,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception. `mode` is the 0-based spectral index the failure
/// refers to, when there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what,
          std::optional<std::size_t> mode = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> mode() const noexcept { return mode_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> mode_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what,
                       std::optional<std::size_t> mode = std::nullopt);

}  // namespace subdiff
