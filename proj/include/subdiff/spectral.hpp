#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace subdiff {

/// Default band for classifying a mode as critical, relative to |alpha|.
inline constexpr double kDefaultEpsCrit = 1e-9;

/// Sine basis sqrt(2/L) sin(k pi x / L) on (0, L).
struct DirichletRealization {
    double length;
};

/// Eigenvalues of A, truncated to N modes. Repeated values encode
/// multiplicity. Indices are 0-based in code and 1-based in all output.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> eigenvalues,
                      std::optional<DirichletRealization> realization = std::nullopt);

    std::size_t size() const noexcept { return eigenvalues_.size(); }
    double lambda(std::size_t k) const { return eigenvalues_.at(k); }
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
    const std::optional<DirichletRealization>& realization() const noexcept {
        return realization_;
    }

    /// v_k(x); requires a realization.
    double basis(std::size_t k, double x) const;

private:
    std::vector<double> eigenvalues_;
    std::optional<DirichletRealization> realization_;
};

/// Fourier coefficients h_k = (h, v_k), aligned with a Spectrum.
struct SpectralVector {
    std::vector<double> coeffs;

    SpectralVector() = default;
    explicit SpectralVector(std::vector<double> c) : coeffs(std::move(c)) {}
    static SpectralVector zeros(std::size_t n) { return SpectralVector(std::vector<double>(n, 0.0)); }

    std::size_t size() const noexcept { return coeffs.size(); }
    double operator[](std::size_t k) const { return coeffs[k]; }
    double& operator[](std::size_t k) { return coeffs[k]; }
};

/// Parameters of D_t^rho u + A u = f, u(xi0) = alpha u(0) + phi on (0, T].
/// rho = 1 is accepted as the classical limit.
struct FractionalModel {
    double rho;
    double alpha;
    double T;
    double xi0;

    void validate() const;
};

/// Modes with |E_rho(-lambda_k xi0^rho) - alpha| <= tolerance.
struct CriticalSet {
    std::vector<std::size_t> indices;
    double alpha = 0.0;
    double tolerance = 0.0;

    bool contains(std::size_t k) const;
    bool empty() const noexcept { return indices.empty(); }
};

struct OrthogonalityReport {
    bool ok = true;
    std::vector<std::size_t> violators;
};

/// lambda_k = (k pi / L)^2, k = 1..N.
Spectrum dirichlet_spectrum(std::size_t n, double length);

/// Composite trapezoid projection of samples taken at x_j = j L / (n - 1),
/// j = 0..n-1, onto the realization's basis. Requires n >= 4N.
SpectralVector fourier_coeffs(std::span<const double> samples, const Spectrum& spectrum);

/// sum_k h_k v_k(x) at each point.
std::vector<double> synthesize(const SpectralVector& h, const Spectrum& spectrum,
                               std::span<const double> x);

/// (sum_k lambda_k^{2 tau} h_k^2)^{1/2}.
double sobolev_norm(const SpectralVector& h, const Spectrum& spectrum, double tau);

CriticalSet critical_set(const FractionalModel& model, const Spectrum& spectrum,
                         double eps_crit = kDefaultEpsCrit);

OrthogonalityReport check_orthogonality(const SpectralVector& h, const CriticalSet& k0,
                                        double tol);

/// {"eigenvalues": [...], "coeffs": [...]}
nlohmann::ordered_json spectral_document(const Spectrum& spectrum, const SpectralVector& h);

/// Reads a spectral document. The spectrum has no realization.
std::pair<Spectrum, SpectralVector> parse_spectral_document(const nlohmann::ordered_json& doc);

}  // namespace subdiff
