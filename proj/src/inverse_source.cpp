#include "subdiff/inverse_source.hpp"

#include <cmath>
#include <memory>

#include "subdiff/error.hpp"
#include "subdiff/json_io.hpp"
#include "subdiff/mittag_leffler.hpp"

namespace subdiff {

namespace {

struct Terms {
    double a0, b0, a1, b1;
};

Terms terms(const FractionalModel& model, double lambda, double xi1) {
    return {ml_a(model.rho, lambda, model.xi0), ml_b(model.rho, lambda, model.xi0),
            ml_a(model.rho, lambda, xi1), ml_b(model.rho, lambda, xi1)};
}

double margin(const Terms& t, double alpha) { return t.b1 * t.a0 + t.a1 * (alpha - t.b0); }

}  // namespace

double uniqueness_margin(const FractionalModel& model, double lambda, double xi1) {
    if (!(xi1 > 0.0)) fail(ErrorCode::InvalidArgument, "xi1 must be positive");
    return margin(terms(model, lambda, xi1), model.alpha);
}

std::optional<double> find_degenerate_alpha(const FractionalModel& model, double lambda, double xi1) {
    if (!(xi1 > 0.0)) fail(ErrorCode::InvalidArgument, "xi1 must be positive");
    const Terms t = terms(model, lambda, xi1);
    const double alpha = (t.a1 * t.b0 - t.a0 * t.b1) / t.a1;
    if (alpha > 0.0 && alpha < 1.0) return alpha;
    return std::nullopt;
}

SourceRecoveryResult recover_source(const SourceRecoveryInput& input, const Spectrum& spectrum,
                                    const SourceRecoveryOptions& options) {
    const FractionalModel& model = input.model;
    model.validate();
    const std::size_t n = spectrum.size();
    if (input.phi.size() != n || input.V.size() != n) {
        fail(ErrorCode::InvalidArgument, "phi and V must be aligned with the spectrum");
    }
    if (!(input.xi1 > 0.0 && input.xi1 <= model.T)) {
        fail(ErrorCode::BadGeometry, "xi1 must lie in (0, T]");
    }
    if (input.xi1 >= model.xi0 && !options.allow_xi1_beyond_xi0) {
        fail(ErrorCode::BadGeometry, "source recovery requires xi1 < xi0");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(input.phi[k]) || !std::isfinite(input.V[k])) {
            fail(ErrorCode::InvalidArgument, "phi and V must be finite", k);
        }
    }

    const CriticalSet k0 = critical_set(model, spectrum, options.eps_crit);
    require_orthogonal(input.phi, k0, options.orth_tol, "phi");

    SpectralVector f = SpectralVector::zeros(n);
    std::vector<double> c(n, 0.0);
    std::map<std::size_t, double> free_modes;
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = spectrum.lambda(k);
        const Terms t = terms(model, lambda, input.xi1);
        if (k0.contains(k)) {
            // Only the homogeneous part survives; V pins its amplitude.
            c[k] = input.V[k] / t.b1;
            free_modes[k] = c[k];
            continue;
        }
        const double d = margin(t, model.alpha);
        const double scale = std::abs(t.b1 * t.a0) + std::abs(t.a1 * (model.alpha - t.b0));
        if (!(std::abs(d) > options.eps_den * scale)) {
            fail(ErrorCode::DegenerateDenominator,
                 "uniqueness margin D = " + format_double(d) + " is numerically zero", k);
        }
        f[k] = ((model.alpha - t.b0) * input.V[k] + t.b1 * input.phi[k]) / d;
        // u(xi1) = V gives the amplitude without dividing by b(xi0) - alpha.
        c[k] = (input.V[k] - f[k] * t.a1) / t.b1;
    }

    auto source = std::make_shared<const SourceTerm>(SourceTerm::constant(f));
    SpectralSolution u(model, spectrum, source, std::move(c), std::move(free_modes),
                       kDefaultOmegaPanels);
    return {std::move(f), std::move(u), k0};
}

}  // namespace subdiff
