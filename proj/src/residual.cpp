#include "subdiff/residual.hpp"

#include <algorithm>
#include <cmath>

#include "subdiff/error.hpp"

namespace subdiff {

std::vector<double> caputo_l1(std::span<const double> samples, double dt, double rho) {
    if (samples.size() < 3) fail(ErrorCode::InvalidArgument, "L1 scheme needs at least 3 nodes");
    if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "L1 scheme needs a positive step");
    if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorCode::InvalidArgument, "rho must lie in (0, 1]");
    const std::size_t m = samples.size() - 1;
    std::vector<double> w(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double x = static_cast<double>(j);
        w[j] = std::pow(x + 1.0, 1.0 - rho) - std::pow(x, 1.0 - rho);
    }
    std::vector<double> diff(m);
    for (std::size_t j = 0; j < m; ++j) diff[j] = samples[j + 1] - samples[j];

    const double scale = std::pow(dt, -rho) / std::tgamma(2.0 - rho);
    std::vector<double> out(samples.size(), 0.0);
    for (std::size_t n = 1; n <= m; ++n) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += w[j] * diff[n - 1 - j];
        out[n] = scale * sum;
    }
    return out;
}

std::vector<double> caputo_l1(const TimeGrid& grid, std::span<const double> samples, double rho) {
    grid.validate();
    if (!grid.is_uniform()) fail(ErrorCode::InvalidArgument, "L1 scheme requires a uniform grid");
    if (samples.size() != grid.size()) {
        fail(ErrorCode::InvalidArgument, "sample count does not match the time grid");
    }
    return caputo_l1(samples, grid.nodes[1] - grid.nodes[0], rho);
}

ResidualReport verify(const SpectralSolution& sol, const FractionalModel& model,
                      const Spectrum& spectrum, const SourceTerm& f, const SpectralVector& phi,
                      const std::optional<OverDetermination>& overdet, const VerifyOptions& options) {
    model.validate();
    const std::size_t n = spectrum.size();
    if (sol.size() != n || phi.size() != n || f.size() != n) {
        fail(ErrorCode::InvalidArgument, "verify inputs are not aligned with the spectrum");
    }
    if (options.intervals < 2) fail(ErrorCode::InvalidArgument, "verification grid too coarse");

    ResidualReport report;
    report.grid = TimeGrid::uniform(model.T, options.intervals);
    const double dt = report.grid.nodes[1];
    report.t_min = options.t_min.value_or(dt);
    if (!(report.t_min > 0.0)) fail(ErrorCode::InvalidArgument, "t_min must be positive");

    const auto& t = report.grid.nodes;
    std::vector<double> u(t.size());
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = spectrum.lambda(k);
        const ModeForcing fk = f.mode(k);
        for (std::size_t j = 0; j < t.size(); ++j) u[j] = sol.mode_value(k, t[j]);
        const std::vector<double> d = caputo_l1(u, dt, model.rho);
        for (std::size_t j = 1; j < t.size(); ++j) {
            if (t[j] < report.t_min * (1.0 - 1e-12)) continue;
            const double r = std::abs(d[j] + lambda * u[j] - fk(t[j]));
            if (!(r <= report.equation_residual)) {
                report.equation_residual = r;
                report.equation_mode = k;
                report.equation_time = t[j];
            }
        }
        const double nonlocal =
            std::abs(sol.mode_value(k, model.xi0) - model.alpha * u[0] - phi[k]);
        report.nonlocal_residual = std::max(report.nonlocal_residual, nonlocal);
    }
    if (overdet) {
        if (overdet->target.size() != n) {
            fail(ErrorCode::InvalidArgument, "over-determination target is not aligned");
        }
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            worst = std::max(worst, std::abs(sol.mode_value(k, overdet->time) - overdet->target[k]));
        }
        report.overdet_residual = worst;
    }
    return report;
}

nlohmann::ordered_json to_json(const ResidualReport& report) {
    nlohmann::ordered_json doc;
    doc["equation_residual"] = report.equation_residual;
    doc["equation_residual_at"] = {{"k", report.equation_mode + 1}, {"t", report.equation_time}};
    doc["nonlocal_residual"] = report.nonlocal_residual;
    doc["overdet_residual"] =
        report.overdet_residual ? nlohmann::ordered_json(*report.overdet_residual) : nlohmann::ordered_json();
    doc["grid"] = {{"intervals", report.grid.size() - 1},
                   {"dt", report.grid.nodes[1] - report.grid.nodes[0]},
                   {"t_min", report.t_min}};
    return doc;
}

}  // namespace subdiff
