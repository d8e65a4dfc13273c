#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "subdiff/config.hpp"
#include "subdiff/error.hpp"

namespace subdiff {

enum ExitCode : int {
    kExitOk = 0,
    kExitResidual = 1,
    kExitConfig = 2,
    kExitOrthogonality = 3,
    kExitDegenerate = 4,
    kExitBadGeometry = 5,
    kExitNearCritical = 6,
    kExitNumerical = 7,
    kExitIo = 8,
};

int exit_code(ErrorCode code) noexcept;

/// forward, invert-source, invert-phi, verify, roundtrip, critical-scan.
const std::vector<std::string>& config_commands();

/// Runs one subcommand against a parsed configuration, writing artifacts to
/// config.out_dir and a short summary to `console`. Returns the exit code;
/// solver failures propagate as Error.
int run(const std::string& command, const RunConfig& config, std::ostream& console);

/// Prints E_{rho,mu}(z) for each z.
int run_ml_eval(double rho, double mu, const std::vector<double>& z, std::ostream& console);

}  // namespace subdiff
