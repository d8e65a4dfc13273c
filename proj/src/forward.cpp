#include "subdiff/forward.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "subdiff/error.hpp"
#include "subdiff/json_io.hpp"
#include "subdiff/mittag_leffler.hpp"

namespace subdiff {

TimeGrid TimeGrid::uniform(double end, std::size_t intervals) {
    if (intervals == 0) fail(ErrorCode::InvalidArgument, "time grid needs at least one interval");
    if (!(end > 0.0) || !std::isfinite(end)) {
        fail(ErrorCode::InvalidArgument, "time grid end must be positive");
    }
    TimeGrid g;
    g.nodes.resize(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j) {
        g.nodes[j] = end * static_cast<double>(j) / static_cast<double>(intervals);
    }
    g.nodes.back() = end;
    return g;
}

void TimeGrid::validate() const {
    if (nodes.size() < 2) fail(ErrorCode::InvalidArgument, "time grid needs at least two nodes");
    if (nodes.front() != 0.0) fail(ErrorCode::InvalidArgument, "time grid must start at 0");
    for (std::size_t j = 1; j < nodes.size(); ++j) {
        if (!(nodes[j] > nodes[j - 1]) || !std::isfinite(nodes[j])) {
            fail(ErrorCode::InvalidArgument, "time grid must be strictly increasing");
        }
    }
}

bool TimeGrid::is_uniform(double rel_tol) const {
    if (nodes.size() < 2) return false;
    const double h = (nodes.back() - nodes.front()) / static_cast<double>(nodes.size() - 1);
    for (std::size_t j = 1; j < nodes.size(); ++j) {
        if (std::abs(nodes[j] - nodes[j - 1] - h) > rel_tol * h) return false;
    }
    return true;
}

ModeForcing ModeForcing::constant(double value) {
    ModeForcing f;
    f.kind_ = Kind::Constant;
    f.value_ = value;
    return f;
}

ModeForcing ModeForcing::sampled(const TimeGrid& grid, std::span<const double> samples) {
    if (samples.size() != grid.size()) {
        fail(ErrorCode::InvalidArgument, "sample count does not match the time grid");
    }
    ModeForcing f;
    f.kind_ = Kind::Sampled;
    f.grid_ = &grid;
    f.samples_ = samples;
    return f;
}

ModeForcing ModeForcing::power_law(std::span<const PowerTerm> terms) {
    ModeForcing f;
    f.kind_ = Kind::PowerLaw;
    f.terms_ = terms;
    return f;
}

double ModeForcing::operator()(double t) const {
    switch (kind_) {
        case Kind::Constant: return value_;
        case Kind::PowerLaw: {
            double sum = 0.0;
            for (const auto& term : terms_) {
                sum += term.coeff * (term.exponent == 0.0 ? 1.0 : std::pow(t, term.exponent));
            }
            return sum;
        }
        case Kind::Sampled: break;
    }
    const auto& x = grid_->nodes;
    const double end = x.back();
    if (t < 0.0 || t > end * (1.0 + 1e-12)) {
        fail(ErrorCode::Domain, "time " + format_double(t) + " lies outside the sampled source grid");
    }
    if (t >= end) return samples_.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double w = (t - x[j - 1]) / (x[j] - x[j - 1]);
    return (1.0 - w) * samples_[j - 1] + w * samples_[j];
}

SourceTerm SourceTerm::constant(SpectralVector f) {
    SourceTerm s;
    s.kind_ = Kind::Constant;
    s.constant_ = std::move(f);
    return s;
}

SourceTerm SourceTerm::sampled(TimeGrid grid, std::vector<std::vector<double>> samples) {
    grid.validate();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (samples[k].size() != grid.size()) {
            fail(ErrorCode::InvalidArgument, "sample count does not match the time grid", k);
        }
        for (double v : samples[k]) {
            // Bounded data only; a source blowing up at t = 0 is not supported.
            if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "source samples must be finite", k);
        }
    }
    SourceTerm s;
    s.kind_ = Kind::Sampled;
    s.grid_ = std::move(grid);
    s.samples_ = std::move(samples);
    return s;
}

SourceTerm SourceTerm::power_law(std::vector<std::vector<PowerTerm>> terms) {
    for (std::size_t k = 0; k < terms.size(); ++k) {
        for (const auto& term : terms[k]) {
            if (!(term.exponent >= 0.0) || !std::isfinite(term.exponent) || !std::isfinite(term.coeff)) {
                fail(ErrorCode::InvalidArgument,
                     "power-law source terms need finite coefficients and exponents >= 0", k);
            }
        }
    }
    SourceTerm s;
    s.kind_ = Kind::PowerLaw;
    s.terms_ = std::move(terms);
    return s;
}

std::size_t SourceTerm::size() const noexcept {
    switch (kind_) {
        case Kind::Constant: return constant_.size();
        case Kind::Sampled: return samples_.size();
        case Kind::PowerLaw: return terms_.size();
    }
    return 0;
}

ModeForcing SourceTerm::mode(std::size_t k) const {
    if (k >= size()) fail(ErrorCode::InvalidArgument, "mode index outside the source", k);
    switch (kind_) {
        case Kind::Constant: return ModeForcing::constant(constant_[k]);
        case Kind::Sampled: return ModeForcing::sampled(grid_, samples_[k]);
        case Kind::PowerLaw: return ModeForcing::power_law(terms_[k]);
    }
    return ModeForcing::constant(0.0);
}

SpectralVector SourceTerm::at(double t) const {
    SpectralVector out = SpectralVector::zeros(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = mode(k)(t);
    return out;
}

SpectralVector SourceTerm::sup_norms(double horizon) const {
    SpectralVector out = SpectralVector::zeros(size());
    for (std::size_t k = 0; k < size(); ++k) {
        switch (kind_) {
            case Kind::Constant: out[k] = std::abs(constant_[k]); break;
            case Kind::Sampled:
                for (double v : samples_[k]) out[k] = std::max(out[k], std::abs(v));
                break;
            case Kind::PowerLaw:
                for (const auto& term : terms_[k]) {
                    out[k] += std::abs(term.coeff) *
                              (term.exponent == 0.0 ? 1.0 : std::pow(horizon, term.exponent));
                }
                break;
        }
    }
    return out;
}

void SourceTerm::validate(std::size_t modes, double horizon) const {
    if (size() != modes) {
        fail(ErrorCode::InvalidArgument, "source has " + std::to_string(size()) +
                                             " modes, spectrum has " + std::to_string(modes));
    }
    if (kind_ == Kind::Constant) {
        for (std::size_t k = 0; k < modes; ++k) {
            if (!std::isfinite(constant_[k])) fail(ErrorCode::InvalidArgument, "source must be finite", k);
        }
    }
    if (kind_ == Kind::Sampled && grid_.end() < horizon * (1.0 - 1e-12)) {
        fail(ErrorCode::InvalidArgument, "sampled source does not cover [0, T]");
    }
}

double omega(double rho, double lambda, const ModeForcing& f, double t, std::size_t panels) {
    if (!(t >= 0.0)) fail(ErrorCode::Domain, "omega requires t >= 0");
    if (t == 0.0) return 0.0;
    switch (f.kind()) {
        case ModeForcing::Kind::Constant: {
            const double c = f.constant_value();
            return c == 0.0 ? 0.0 : c * ml_a(rho, lambda, t);
        }
        case ModeForcing::Kind::PowerLaw: {
            // int_0^t K(eta) (t - eta)^beta d eta = Gamma(beta+1) t^{rho+beta} E_{rho,rho+beta+1}(-lambda t^rho)
            double sum = 0.0;
            for (const auto& term : f.terms()) {
                if (term.coeff == 0.0) continue;
                if (term.exponent == 0.0) {
                    sum += term.coeff * ml_a(rho, lambda, t);
                } else {
                    const double mu = rho + term.exponent + 1.0;
                    sum += term.coeff * std::tgamma(term.exponent + 1.0) * std::pow(t, rho + term.exponent) *
                           ml({rho, mu}, -lambda * std::pow(t, rho));
                }
            }
            return sum;
        }
        case ModeForcing::Kind::Sampled: break;
    }
    if (panels == 0) fail(ErrorCode::InvalidArgument, "omega needs at least one panel");

    // f(t) a(t) exactly, plus the remainder with f(t - eta) - f(t), which
    // vanishes where the kernel is largest. With s = eta^rho the remainder is
    // (1/rho) int_0^{t^rho} E_{rho,rho}(-lambda s) (f(t - s^{1/rho}) - f(t)) ds.
    const double ft = f(t);
    const double span_s = std::pow(t, rho);
    const std::size_t n = 2 * panels;
    const double h = span_s / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double s = h * static_cast<double>(i);
        const double eta = i == n ? t : std::pow(s, 1.0 / rho);
        const double diff = f(std::max(t - eta, 0.0)) - ft;
        if (diff == 0.0) continue;
        const double w = (i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * ml({rho, rho}, -lambda * s) * diff;
    }
    const double remainder = sum * h / 3.0 / rho;
    return ft * ml_a(rho, lambda, t) + remainder;
}

SpectralSolution::SpectralSolution(FractionalModel model, Spectrum spectrum,
                                   std::shared_ptr<const SourceTerm> source,
                                   std::vector<double> amplitudes,
                                   std::map<std::size_t, double> free_modes,
                                   std::size_t omega_panels)
    : model_(model),
      spectrum_(std::move(spectrum)),
      source_(std::move(source)),
      amplitudes_(std::move(amplitudes)),
      free_modes_(std::move(free_modes)),
      omega_panels_(omega_panels) {
    if (!source_) fail(ErrorCode::InvalidArgument, "solution needs a source term");
    if (amplitudes_.size() != spectrum_.size() || source_->size() != spectrum_.size()) {
        fail(ErrorCode::InvalidArgument, "solution components are not aligned with the spectrum");
    }
}

double SpectralSolution::mode_value(std::size_t k, double t) const {
    if (k >= size()) fail(ErrorCode::InvalidArgument, "mode index outside the solution", k);
    if (!(t >= 0.0 && t <= model_.T * (1.0 + 1e-12))) {
        fail(ErrorCode::Domain, "evaluation time " + format_double(t) + " outside [0, T]");
    }
    const double lambda = spectrum_.lambda(k);
    const double c = amplitudes_[k];
    const double homogeneous = c == 0.0 ? 0.0 : c * ml_b(model_.rho, lambda, t);
    return homogeneous + omega(model_.rho, lambda, source_->mode(k), t, omega_panels_);
}

void require_orthogonal(const SpectralVector& h, const CriticalSet& k0, double tol,
                        const char* what) {
    const auto report = check_orthogonality(h, k0, tol);
    if (report.ok) return;
    std::string list;
    for (std::size_t k : report.violators) {
        if (!list.empty()) list += ", ";
        list += std::to_string(k + 1);
    }
    fail(ErrorCode::OrthogonalityViolation,
         std::string(what) + " is not orthogonal to the critical eigenfunctions k = {" + list + "}",
         report.violators.front());
}

SpectralSolution solve_forward(const FractionalModel& model, const Spectrum& spectrum,
                               const SourceTerm& f, const SpectralVector& phi,
                               const std::map<std::size_t, double>& b_free,
                               const ForwardOptions& options) {
    return solve_forward(model, spectrum, std::make_shared<const SourceTerm>(f), phi, b_free, options);
}

SpectralSolution solve_forward(const FractionalModel& model, const Spectrum& spectrum,
                               std::shared_ptr<const SourceTerm> f, const SpectralVector& phi,
                               const std::map<std::size_t, double>& b_free,
                               const ForwardOptions& options) {
    model.validate();
    const std::size_t n = spectrum.size();
    if (!f) fail(ErrorCode::InvalidArgument, "source term is missing");
    f->validate(n, model.T);
    if (phi.size() != n) fail(ErrorCode::InvalidArgument, "phi is not aligned with the spectrum");

    const CriticalSet k0 = critical_set(model, spectrum, options.eps_crit);
    require_orthogonal(phi, k0, options.orth_tol, "phi");
    require_orthogonal(f->sup_norms(model.T), k0, options.orth_tol, "f");
    for (const auto& [k, value] : b_free) {
        if (k >= n) fail(ErrorCode::InvalidArgument, "free coefficient index outside the spectrum", k);
        if (!k0.contains(k)) {
            fail(ErrorCode::InvalidArgument, "free coefficient given for a non-critical mode", k);
        }
        if (!std::isfinite(value)) fail(ErrorCode::InvalidArgument, "free coefficient must be finite", k);
    }

    std::vector<double> c(n, 0.0);
    std::map<std::size_t, double> free_modes;
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(phi[k])) fail(ErrorCode::InvalidArgument, "phi must be finite", k);
        if (k0.contains(k)) {
            const auto it = b_free.find(k);
            c[k] = it == b_free.end() ? 0.0 : it->second;
            free_modes[k] = c[k];
            continue;
        }
        const double lambda = spectrum.lambda(k);
        const double den = ml_b(model.rho, lambda, model.xi0) - model.alpha;
        if (std::abs(den) < options.eps_crit) {
            fail(ErrorCode::NearCriticalDenominator,
                 "E_rho(-lambda xi0^rho) - alpha = " + format_double(den) +
                     " is below eps_crit but the mode is not classified critical",
                 k);
        }
        const double w0 = omega(model.rho, lambda, f->mode(k), model.xi0, options.omega_panels);
        c[k] = (phi[k] - w0) / den;
    }
    return SpectralSolution(model, spectrum, std::move(f), std::move(c), std::move(free_modes),
                            options.omega_panels);
}

SpectralVector eval_solution(const SpectralSolution& sol, double t) {
    SpectralVector u = SpectralVector::zeros(sol.size());
    for (std::size_t k = 0; k < sol.size(); ++k) u[k] = sol.mode_value(k, t);
    return u;
}

void write_solution_csv(std::ostream& out, const SpectralSolution& sol, const TimeGrid& grid) {
    out << "t,k,u_k\n";
    for (double t : grid.nodes) {
        for (std::size_t k = 0; k < sol.size(); ++k) {
            out << format_double(t) << ',' << (k + 1) << ',' << format_double(sol.mode_value(k, t)) << '\n';
        }
    }
}

}  // namespace subdiff
