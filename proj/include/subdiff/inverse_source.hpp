#pragma once

#include <optional>

#include "subdiff/forward.hpp"
#include "subdiff/spectral.hpp"

namespace subdiff {

/// Data for recovering a time-independent source from u(xi1) = V.
struct SourceRecoveryInput {
    FractionalModel model;
    double xi1;
    SpectralVector phi;
    SpectralVector V;
};

struct SourceRecoveryOptions {
    double eps_crit = kDefaultEpsCrit;
    double orth_tol = 1e-12;
    /// Relative floor: |D| <= eps_den * (|b(xi1) a(xi0)| + |a(xi1) (alpha - b(xi0))|)
    /// counts as degenerate.
    double eps_den = 1e-10;
    /// Allow xi1 >= xi0, where D may vanish.
    bool allow_xi1_beyond_xi0 = false;
};

struct SourceRecoveryResult {
    SpectralVector f;
    SpectralSolution u;
    CriticalSet critical;
};

/// D(lambda) = b(xi1) a(xi0) + a(xi1) (alpha - b(xi0)).
double uniqueness_margin(const FractionalModel& model, double lambda, double xi1);

/// alpha* = (a(xi1) b(xi0) - a(xi0) b(xi1)) / a(xi1), the root of D in alpha,
/// when it lies in (0, 1). The model's own alpha is ignored.
std::optional<double> find_degenerate_alpha(const FractionalModel& model, double lambda, double xi1);

SourceRecoveryResult recover_source(const SourceRecoveryInput& input, const Spectrum& spectrum,
                                    const SourceRecoveryOptions& options = {});

}  // namespace subdiff
