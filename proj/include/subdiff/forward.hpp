#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "subdiff/spectral.hpp"

namespace subdiff {

/// Nodes 0 = t_0 < t_1 < ... < t_M.
struct TimeGrid {
    std::vector<double> nodes;

    static TimeGrid uniform(double end, std::size_t intervals);

    void validate() const;
    double end() const { return nodes.back(); }
    std::size_t size() const noexcept { return nodes.size(); }
    bool is_uniform(double rel_tol = 1e-9) const;
};

/// coeff * t^exponent, exponent >= 0.
struct PowerTerm {
    double coeff;
    double exponent;
};

/// Forcing of one mode. Non-owning view into a SourceTerm.
class ModeForcing {
public:
    enum class Kind { Constant, Sampled, PowerLaw };

    static ModeForcing constant(double value);
    static ModeForcing sampled(const TimeGrid& grid, std::span<const double> samples);
    static ModeForcing power_law(std::span<const PowerTerm> terms);

    Kind kind() const noexcept { return kind_; }
    double constant_value() const noexcept { return value_; }
    std::span<const PowerTerm> terms() const noexcept { return terms_; }

    /// f_k(t); sampled forcing is interpolated linearly and must cover t.
    double operator()(double t) const;

private:
    Kind kind_ = Kind::Constant;
    double value_ = 0.0;
    const TimeGrid* grid_ = nullptr;
    std::span<const double> samples_;
    std::span<const PowerTerm> terms_;
};

/// Source f(t) = sum_k f_k(t) v_k in one of three forms: time-constant
/// coefficients, per-mode samples on a time grid, or per-mode finite sums of
/// power laws (which admit a closed-form Duhamel integral).
class SourceTerm {
public:
    enum class Kind { Constant, Sampled, PowerLaw };

    static SourceTerm constant(SpectralVector f);
    /// samples[k][j] = f_k(grid.nodes[j]).
    static SourceTerm sampled(TimeGrid grid, std::vector<std::vector<double>> samples);
    static SourceTerm power_law(std::vector<std::vector<PowerTerm>> terms);
    static SourceTerm zero(std::size_t modes) { return constant(SpectralVector::zeros(modes)); }

    Kind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept;
    ModeForcing mode(std::size_t k) const;

    /// (f_k(t))_k.
    SpectralVector at(double t) const;

    /// Per-mode bound on sup_{0 <= t <= horizon} |f_k(t)|: exact for constant
    /// and sampled data, sum |c| horizon^beta for power laws.
    SpectralVector sup_norms(double horizon) const;

    const SpectralVector& constant_coeffs() const noexcept { return constant_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    const std::vector<std::vector<double>>& samples() const noexcept { return samples_; }
    const std::vector<std::vector<PowerTerm>>& power_terms() const noexcept { return terms_; }

    /// Checks alignment with the spectrum and coverage of [0, horizon].
    void validate(std::size_t modes, double horizon) const;

private:
    Kind kind_ = Kind::Constant;
    SpectralVector constant_;
    TimeGrid grid_;
    std::vector<std::vector<double>> samples_;
    std::vector<std::vector<PowerTerm>> terms_;
};

inline constexpr std::size_t kDefaultOmegaPanels = 512;

/// omega(t) = int_0^t eta^{rho-1} E_{rho,rho}(-lambda eta^rho) f(t - eta) d eta.
/// Sampled forcing uses composite Simpson in s = eta^rho on `panels` panels.
double omega(double rho, double lambda, const ModeForcing& f, double t,
             std::size_t panels = kDefaultOmegaPanels);

struct ForwardOptions {
    double eps_crit = kDefaultEpsCrit;
    /// Largest |phi_k| or sup |f_k| accepted on a critical mode.
    double orth_tol = 1e-12;
    std::size_t omega_panels = kDefaultOmegaPanels;
};

/// u_k(t) = c_k E_rho(-lambda_k t^rho) + omega_k(t), mode by mode.
class SpectralSolution {
public:
    SpectralSolution(FractionalModel model, Spectrum spectrum,
                     std::shared_ptr<const SourceTerm> source, std::vector<double> amplitudes,
                     std::map<std::size_t, double> free_modes, std::size_t omega_panels);

    const FractionalModel& model() const noexcept { return model_; }
    const Spectrum& spectrum() const noexcept { return spectrum_; }
    const SourceTerm& source() const noexcept { return *source_; }
    std::shared_ptr<const SourceTerm> source_ptr() const noexcept { return source_; }
    std::size_t size() const noexcept { return amplitudes_.size(); }

    /// c_k, which equals u_k(0).
    const std::vector<double>& amplitudes() const noexcept { return amplitudes_; }
    /// Critical modes and the amplitude chosen for them.
    const std::map<std::size_t, double>& free_modes() const noexcept { return free_modes_; }
    std::size_t omega_panels() const noexcept { return omega_panels_; }

    double mode_value(std::size_t k, double t) const;

private:
    FractionalModel model_;
    Spectrum spectrum_;
    std::shared_ptr<const SourceTerm> source_;
    std::vector<double> amplitudes_;
    std::map<std::size_t, double> free_modes_;
    std::size_t omega_panels_;
};

/// Solves the non-local problem. Critical modes take their amplitude from
/// b_free (default 0); a b_free entry on a non-critical mode is rejected.
SpectralSolution solve_forward(const FractionalModel& model, const Spectrum& spectrum,
                               const SourceTerm& f, const SpectralVector& phi,
                               const std::map<std::size_t, double>& b_free = {},
                               const ForwardOptions& options = {});

SpectralSolution solve_forward(const FractionalModel& model, const Spectrum& spectrum,
                               std::shared_ptr<const SourceTerm> f, const SpectralVector& phi,
                               const std::map<std::size_t, double>& b_free = {},
                               const ForwardOptions& options = {});

/// (u_k(t))_k for t in [0, T].
SpectralVector eval_solution(const SpectralSolution& sol, double t);

/// Rejects critical-mode data that is not orthogonal; shared by the solvers.
void require_orthogonal(const SpectralVector& h, const CriticalSet& k0, double tol,
                        const char* what);

/// CSV with header t,k,u_k and one row per (t, k); k is 1-based.
void write_solution_csv(std::ostream& out, const SpectralSolution& sol, const TimeGrid& grid);

}  // namespace subdiff
