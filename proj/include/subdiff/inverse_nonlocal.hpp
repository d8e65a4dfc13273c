#pragma once

#include <memory>
#include <vector>

#include "subdiff/forward.hpp"
#include "subdiff/spectral.hpp"

namespace subdiff {

/// Data for recovering phi from u(xi2) = W with a known source.
struct PhiRecoveryInput {
    FractionalModel model;
    double xi2;
    std::shared_ptr<const SourceTerm> f;
    SpectralVector W;
};

struct PhiRecoveryOptions {
    double eps_crit = kDefaultEpsCrit;
    double orth_tol = 1e-12;
    std::size_t omega_panels = kDefaultOmegaPanels;
    /// Exponent of the D(A^eps) norm reported for f.
    double sobolev_eps = 0.5;
};

struct PhiRecoveryResult {
    SpectralVector phi;
    SpectralSolution u;
    CriticalSet critical;
    /// max over the source's time samples of ||f(t)||_eps; diagnostic only.
    double source_sobolev_norm;
};

PhiRecoveryResult recover_phi(const PhiRecoveryInput& input, const Spectrum& spectrum,
                              const PhiRecoveryOptions& options = {});

inline constexpr double kBackwardFlagThreshold = 1e6;

struct BackwardLimitMode {
    /// |(b(xi0) - alpha) / b(xi2)|, the factor applied to W_k - omega_k(xi2).
    double factor;
    /// factor * |W_k - omega_k(xi2)|.
    double propagated;
    bool flagged;
};

struct BackwardLimitReport {
    double xi2;
    std::vector<BackwardLimitMode> modes;
    double max_factor = 0.0;
    std::size_t flagged = 0;
};

/// Conditioning of phi recovery in the backward setting alpha = 0. Requires
/// model.alpha == 0; reports, never fails on large factors.
BackwardLimitReport backward_limit_check(const FractionalModel& model, const Spectrum& spectrum,
                                         double xi2, const SourceTerm& f, const SpectralVector& W,
                                         std::size_t omega_panels = kDefaultOmegaPanels);

}  // namespace subdiff
