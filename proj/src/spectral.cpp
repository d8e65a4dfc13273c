#include "subdiff/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "subdiff/error.hpp"
#include "subdiff/mittag_leffler.hpp"

namespace subdiff {

Spectrum::Spectrum(std::vector<double> eigenvalues,
                   std::optional<DirichletRealization> realization)
    : eigenvalues_(std::move(eigenvalues)), realization_(realization) {
    if (eigenvalues_.empty()) fail(ErrorCode::InvalidArgument, "spectrum needs at least one mode");
    for (std::size_t k = 0; k < eigenvalues_.size(); ++k) {
        const double l = eigenvalues_[k];
        if (!(l > 0.0) || !std::isfinite(l)) {
            fail(ErrorCode::InvalidArgument, "eigenvalues must be positive and finite", k);
        }
        if (k > 0 && l < eigenvalues_[k - 1]) {
            fail(ErrorCode::InvalidArgument, "eigenvalues must be non-decreasing", k);
        }
    }
    if (realization_ && !(realization_->length > 0.0)) {
        fail(ErrorCode::InvalidArgument, "realization length must be positive");
    }
}

double Spectrum::basis(std::size_t k, double x) const {
    if (!realization_) fail(ErrorCode::InvalidArgument, "spectrum has no concrete basis");
    const double len = realization_->length;
    return std::sqrt(2.0 / len) * std::sin(static_cast<double>(k + 1) * std::numbers::pi * x / len);
}

void FractionalModel::validate() const {
    if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorCode::InvalidArgument, "rho must lie in (0, 1]");
    if (!std::isfinite(alpha)) fail(ErrorCode::InvalidArgument, "alpha must be finite");
    if (!(T > 0.0) || !std::isfinite(T)) fail(ErrorCode::InvalidArgument, "T must be positive");
    if (!(xi0 > 0.0 && xi0 <= T)) fail(ErrorCode::InvalidArgument, "xi0 must lie in (0, T]");
}

bool CriticalSet::contains(std::size_t k) const {
    return std::binary_search(indices.begin(), indices.end(), k);
}

Spectrum dirichlet_spectrum(std::size_t n, double length) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "number of modes must be positive");
    if (!(length > 0.0) || !std::isfinite(length)) {
        fail(ErrorCode::InvalidArgument, "interval length must be positive");
    }
    std::vector<double> eig(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = static_cast<double>(k + 1) * std::numbers::pi / length;
        eig[k] = w * w;
    }
    return Spectrum(std::move(eig), DirichletRealization{length});
}

SpectralVector fourier_coeffs(std::span<const double> samples, const Spectrum& spectrum) {
    if (!spectrum.realization()) {
        fail(ErrorCode::InvalidArgument, "fourier_coeffs needs a spectrum with a concrete basis");
    }
    const std::size_t n = samples.size();
    if (n < 4 * spectrum.size() || n < 3) {
        fail(ErrorCode::InvalidArgument,
             "grid of " + std::to_string(n) + " points does not resolve " +
                 std::to_string(spectrum.size()) + " modes (need at least 4N)");
    }
    const double len = spectrum.realization()->length;
    const double dx = len / static_cast<double>(n - 1);
    SpectralVector h = SpectralVector::zeros(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
            sum += w * samples[j] * spectrum.basis(k, static_cast<double>(j) * dx);
        }
        h[k] = sum * dx;
    }
    return h;
}

std::vector<double> synthesize(const SpectralVector& h, const Spectrum& spectrum,
                               std::span<const double> x) {
    if (h.size() != spectrum.size()) {
        fail(ErrorCode::InvalidArgument, "coefficient vector does not match the spectrum");
    }
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t k = 0; k < h.size(); ++k) out[i] += h[k] * spectrum.basis(k, x[i]);
    }
    return out;
}

double sobolev_norm(const SpectralVector& h, const Spectrum& spectrum, double tau) {
    if (h.size() != spectrum.size()) {
        fail(ErrorCode::InvalidArgument, "coefficient vector does not match the spectrum");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double w = tau == 0.0 ? 1.0 : std::pow(spectrum.lambda(k), 2.0 * tau);
        sum += w * h[k] * h[k];
    }
    return std::sqrt(sum);
}

CriticalSet critical_set(const FractionalModel& model, const Spectrum& spectrum, double eps_crit) {
    model.validate();
    CriticalSet set;
    set.alpha = model.alpha;
    set.tolerance = eps_crit * std::abs(model.alpha);
    // b lies in (0, 1), so nothing can match outside that interval.
    if (!(model.alpha > 0.0 && model.alpha < 1.0)) return set;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double b = ml_b(model.rho, spectrum.lambda(k), model.xi0);
        if (std::abs(b - model.alpha) <= set.tolerance) set.indices.push_back(k);
    }
    return set;
}

OrthogonalityReport check_orthogonality(const SpectralVector& h, const CriticalSet& k0, double tol) {
    OrthogonalityReport report;
    for (std::size_t k : k0.indices) {
        if (k >= h.size()) fail(ErrorCode::InvalidArgument, "critical index outside the vector");
        if (!(std::abs(h[k]) <= tol)) report.violators.push_back(k);
    }
    report.ok = report.violators.empty();
    return report;
}

nlohmann::ordered_json spectral_document(const Spectrum& spectrum, const SpectralVector& h) {
    nlohmann::ordered_json doc;
    doc["eigenvalues"] = spectrum.eigenvalues();
    doc["coeffs"] = h.coeffs;
    return doc;
}

std::pair<Spectrum, SpectralVector> parse_spectral_document(const nlohmann::ordered_json& doc) {
    if (!doc.is_object() || !doc.contains("eigenvalues") || !doc.contains("coeffs")) {
        fail(ErrorCode::Config, "spectral document needs \"eigenvalues\" and \"coeffs\"");
    }
    std::vector<double> eig;
    std::vector<double> coeffs;
    try {
        eig = doc.at("eigenvalues").get<std::vector<double>>();
        coeffs = doc.at("coeffs").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Config, std::string("spectral document: ") + e.what());
    }
    if (eig.size() != coeffs.size()) {
        fail(ErrorCode::Config, "spectral document: eigenvalues and coeffs differ in length");
    }
    return {Spectrum(std::move(eig)), SpectralVector(std::move(coeffs))};
}

}  // namespace subdiff
