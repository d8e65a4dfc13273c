#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "subdiff/forward.hpp"
#include "subdiff/spectral.hpp"

namespace subdiff {

/// L1 approximation of the Caputo derivative at the nodes of a uniform grid
/// with step dt; entry 0 is set to 0. Needs at least 3 samples.
std::vector<double> caputo_l1(std::span<const double> samples, double dt, double rho);

/// Same, on an explicit grid; non-uniform grids are rejected.
std::vector<double> caputo_l1(const TimeGrid& grid, std::span<const double> samples, double rho);

/// u(time) = target, the extra measurement of an inverse problem.
struct OverDetermination {
    double time;
    SpectralVector target;
};

inline constexpr std::size_t kDefaultVerifyIntervals = 512;

struct VerifyOptions {
    std::size_t intervals = kDefaultVerifyIntervals;
    /// Smallest time at which the equation residual is measured; defaults to
    /// one grid step.
    std::optional<double> t_min;
};

struct ResidualReport {
    double equation_residual = 0.0;
    double nonlocal_residual = 0.0;
    std::optional<double> overdet_residual;
    TimeGrid grid;
    double t_min = 0.0;
    /// Where the equation residual peaks (0-based mode).
    std::size_t equation_mode = 0;
    double equation_time = 0.0;
};

/// Checks D_t^rho u_k + lambda_k u_k = f_k on a uniform grid over [0, T]
/// using only point values of u, the non-local condition, and optionally an
/// over-determination condition.
ResidualReport verify(const SpectralSolution& sol, const FractionalModel& model,
                      const Spectrum& spectrum, const SourceTerm& f, const SpectralVector& phi,
                      const std::optional<OverDetermination>& overdet = std::nullopt,
                      const VerifyOptions& options = {});

nlohmann::ordered_json to_json(const ResidualReport& report);

}  // namespace subdiff
