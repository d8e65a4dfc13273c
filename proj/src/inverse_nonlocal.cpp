#include "subdiff/inverse_nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subdiff/error.hpp"
#include "subdiff/json_io.hpp"
#include "subdiff/mittag_leffler.hpp"

namespace subdiff {

namespace {

void check_xi2(const FractionalModel& model, double xi2) {
    if (!(xi2 > 0.0 && xi2 <= model.T * (1.0 + 1e-14))) {
        fail(ErrorCode::BadGeometry, "xi2 must lie in (0, T]");
    }
    if (std::abs(xi2 - model.xi0) <= 1e-14 * model.xi0) {
        fail(ErrorCode::BadGeometry, "xi2 = xi0 turns phi recovery into the backward problem");
    }
}

double b_at(const FractionalModel& model, double lambda, double t, std::size_t k) {
    const double b = ml_b(model.rho, lambda, t);
    if (!(b >= std::numeric_limits<double>::min())) {
        fail(ErrorCode::Underflow,
             "E_rho(-lambda t^rho) underflows at t = " + format_double(t) + "; truncate fewer modes", k);
    }
    return b;
}

double source_sobolev(const SourceTerm& f, const Spectrum& spectrum, double T, double eps) {
    if (f.kind() != SourceTerm::Kind::Sampled) return sobolev_norm(f.sup_norms(T), spectrum, eps);
    double best = 0.0;
    for (double t : f.grid().nodes) {
        if (t > T * (1.0 + 1e-12)) break;
        best = std::max(best, sobolev_norm(f.at(t), spectrum, eps));
    }
    return best;
}

}  // namespace

PhiRecoveryResult recover_phi(const PhiRecoveryInput& input, const Spectrum& spectrum,
                              const PhiRecoveryOptions& options) {
    const FractionalModel& model = input.model;
    model.validate();
    const std::size_t n = spectrum.size();
    if (!input.f) fail(ErrorCode::InvalidArgument, "source term is missing");
    input.f->validate(n, model.T);
    if (input.W.size() != n) fail(ErrorCode::InvalidArgument, "W is not aligned with the spectrum");
    check_xi2(model, input.xi2);

    const CriticalSet k0 = critical_set(model, spectrum, options.eps_crit);
    require_orthogonal(input.f->sup_norms(model.T), k0, options.orth_tol, "f");

    SpectralVector phi = SpectralVector::zeros(n);
    std::vector<double> c(n, 0.0);
    std::map<std::size_t, double> free_modes;
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(input.W[k])) fail(ErrorCode::InvalidArgument, "W must be finite", k);
        const double lambda = spectrum.lambda(k);
        const double b2 = b_at(model, lambda, input.xi2, k);
        if (k0.contains(k)) {
            c[k] = input.W[k] / b2;
            free_modes[k] = c[k];
            continue;
        }
        const ModeForcing fk = input.f->mode(k);
        const double w2 = omega(model.rho, lambda, fk, input.xi2, options.omega_panels);
        const double w0 = omega(model.rho, lambda, fk, model.xi0, options.omega_panels);
        const double b0 = ml_b(model.rho, lambda, model.xi0);
        c[k] = (input.W[k] - w2) / b2;
        phi[k] = (b0 - model.alpha) * c[k] + w0;
    }

    SpectralSolution u(model, spectrum, input.f, std::move(c), std::move(free_modes),
                       options.omega_panels);
    const double sob = source_sobolev(*input.f, spectrum, model.T, options.sobolev_eps);
    return {std::move(phi), std::move(u), k0, sob};
}

BackwardLimitReport backward_limit_check(const FractionalModel& model, const Spectrum& spectrum,
                                         double xi2, const SourceTerm& f, const SpectralVector& W,
                                         std::size_t omega_panels) {
    model.validate();
    if (model.alpha != 0.0) {
        fail(ErrorCode::InvalidArgument, "backward limit check is defined for alpha = 0");
    }
    const std::size_t n = spectrum.size();
    f.validate(n, model.T);
    if (W.size() != n) fail(ErrorCode::InvalidArgument, "W is not aligned with the spectrum");
    check_xi2(model, xi2);

    BackwardLimitReport report;
    report.xi2 = xi2;
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = spectrum.lambda(k);
        const double b2 = ml_b(model.rho, lambda, xi2);
        const double b0 = ml_b(model.rho, lambda, model.xi0);
        BackwardLimitMode m{};
        m.factor = b2 > 0.0 ? std::abs((b0 - model.alpha) / b2) : std::numeric_limits<double>::infinity();
        const double w2 = omega(model.rho, lambda, f.mode(k), xi2, omega_panels);
        m.propagated = m.factor * std::abs(W[k] - w2);
        m.flagged = m.factor > kBackwardFlagThreshold;
        report.max_factor = std::max(report.max_factor, m.factor);
        if (m.flagged) ++report.flagged;
        report.modes.push_back(m);
    }
    return report;
}

}  // namespace subdiff
