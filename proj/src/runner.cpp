#include "subdiff/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "subdiff/forward.hpp"
#include "subdiff/inverse_nonlocal.hpp"
#include "subdiff/inverse_source.hpp"
#include "subdiff/json_io.hpp"
#include "subdiff/mittag_leffler.hpp"
#include "subdiff/residual.hpp"

namespace subdiff {

namespace {

using json = nlohmann::ordered_json;

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
    const char* env = std::getenv("SUBDIFF_LOG");
    if (!env) return LogLevel::Info;
    const std::string v(env);
    if (v == "quiet" || v == "0" || v == "error") return LogLevel::Quiet;
    if (v == "debug" || v == "2") return LogLevel::Debug;
    return LogLevel::Info;
}

void log(LogLevel level, const std::string& msg) {
    static const LogLevel threshold = log_level();
    if (level <= threshold && level != LogLevel::Quiet) std::clog << "[subdiff] " << msg << '\n';
}

// Uniform [0, 1) from the top 53 bits; identical on every platform, unlike
// std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double sign() { return (gen_() >> 63) ? -1.0 : 1.0; }

private:
    std::mt19937_64 gen_;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

std::filesystem::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return std::filesystem::path(dir);
}

json model_json(const FractionalModel& m) {
    return {{"rho", m.rho}, {"alpha", m.alpha}, {"T", m.T}, {"xi0", m.xi0}};
}

json indices_json(const std::vector<std::size_t>& idx) {
    json out = json::array();
    for (std::size_t k : idx) out.push_back(k + 1);
    return out;
}

json free_modes_json(const std::map<std::size_t, double>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[std::to_string(k + 1)] = v;
    return out;
}

TimeGrid output_grid(const RunConfig& cfg) {
    return TimeGrid::uniform(cfg.model.T, cfg.output_points - 1);
}

json samples_json(const SpectralSolution& sol, const TimeGrid& grid) {
    json t = json::array();
    json u = json::array();
    for (double time : grid.nodes) {
        t.push_back(time);
        u.push_back(eval_solution(sol, time).coeffs);
    }
    return {{"t", t}, {"u", u}};
}

struct Tolerated {
    ResidualReport report;
    bool ok;
};

Tolerated check(const ResidualReport& r, const Tolerances& tol) {
    bool ok = r.equation_residual <= tol.equation && r.nonlocal_residual <= tol.nonlocal;
    if (r.overdet_residual) ok = ok && *r.overdet_residual <= tol.overdet;
    return {r, ok};
}

json residual_json(const Tolerated& t, const Tolerances& tol) {
    json doc = to_json(t.report);
    doc["tolerances"] = {{"equation", tol.equation}, {"nonlocal", tol.nonlocal}, {"overdet", tol.overdet}};
    doc["within_tolerance"] = t.ok;
    return doc;
}

VerifyOptions verify_options(const RunConfig& cfg) {
    VerifyOptions o;
    o.intervals = cfg.verify_intervals;
    o.t_min = cfg.t_min;
    return o;
}

void print_table(std::ostream& os, const Tolerated& t, const Tolerances& tol) {
    auto row = [&](const char* name, std::optional<double> value, double limit) {
        os << std::left << std::setw(10) << name;
        if (!value) {
            os << std::setw(26) << "-" << std::setw(26) << "-" << "n/a\n";
            return;
        }
        os << std::setw(26) << format_double(*value) << std::setw(26) << format_double(limit)
           << (*value <= limit ? "pass" : "FAIL") << '\n';
    };
    os << std::left << std::setw(10) << "residual" << std::setw(26) << "value" << std::setw(26)
       << "tolerance" << "status\n";
    row("equation", t.report.equation_residual, tol.equation);
    row("nonlocal", t.report.nonlocal_residual, tol.nonlocal);
    row("overdet", t.report.overdet_residual, tol.overdet);
    os << "equation residual measured for t >= " << format_double(t.report.t_min) << " on "
       << (t.report.grid.size() - 1) << " intervals\n";
}

// One solved problem: what was computed and how well it satisfies its conditions.
struct Solved {
    json result;
    std::unique_ptr<SpectralSolution> solution;
    Tolerated residuals;
};

Solved solve_configured(const RunConfig& cfg) {
    const Spectrum spectrum = build_spectrum(cfg);
    const std::size_t n = spectrum.size();
    log(LogLevel::Info, cfg.problem + ": " + std::to_string(n) + " modes, rho = " +
                            format_double(cfg.model.rho) + ", alpha = " + format_double(cfg.model.alpha));
    json result;
    result["problem"] = cfg.problem;
    result["model"] = model_json(cfg.model);
    result["eigenvalues"] = spectrum.eigenvalues();

    if (cfg.problem == "forward") {
        auto f = std::make_shared<const SourceTerm>(build_source(cfg, spectrum));
        const SpectralVector phi = build_vector(cfg.phi, spectrum, "phi");
        ForwardOptions opt;
        opt.eps_crit = cfg.tol.eps_crit;
        opt.orth_tol = cfg.tol.orth_tol;
        opt.omega_panels = cfg.tol.quadrature_panels;
        auto sol = std::make_unique<SpectralSolution>(solve_forward(cfg.model, spectrum, f, phi, cfg.b_free, opt));
        const CriticalSet k0 = critical_set(cfg.model, spectrum, cfg.tol.eps_crit);
        auto res = check(verify(*sol, cfg.model, spectrum, *f, phi, std::nullopt, verify_options(cfg)), cfg.tol);
        result["critical_set"] = indices_json(k0.indices);
        result["phi"] = phi.coeffs;
        result["amplitudes"] = sol->amplitudes();
        result["free_modes"] = free_modes_json(sol->free_modes());
        return {std::move(result), std::move(sol), res};
    }

    if (cfg.problem == "invert-source") {
        SourceRecoveryInput in{cfg.model, *cfg.xi1, build_vector(cfg.phi, spectrum, "phi"),
                               build_vector(cfg.V, spectrum, "V")};
        SourceRecoveryOptions opt;
        opt.eps_crit = cfg.tol.eps_crit;
        opt.orth_tol = cfg.tol.orth_tol;
        opt.eps_den = cfg.tol.eps_den;
        opt.allow_xi1_beyond_xi0 = cfg.allow_xi1_beyond_xi0;
        SourceRecoveryResult r = recover_source(in, spectrum, opt);
        json margins = json::array();
        for (std::size_t k = 0; k < n; ++k) margins.push_back(uniqueness_margin(cfg.model, spectrum.lambda(k), in.xi1));
        auto res = check(verify(r.u, cfg.model, spectrum, r.u.source(), in.phi,
                                OverDetermination{in.xi1, in.V}, verify_options(cfg)),
                         cfg.tol);
        result["xi1"] = in.xi1;
        result["critical_set"] = indices_json(r.critical.indices);
        result["f"] = r.f.coeffs;
        result["uniqueness_margin"] = margins;
        result["amplitudes"] = r.u.amplitudes();
        result["free_modes"] = free_modes_json(r.u.free_modes());
        return {std::move(result), std::make_unique<SpectralSolution>(std::move(r.u)), res};
    }

    auto f = std::make_shared<const SourceTerm>(build_source(cfg, spectrum));
    PhiRecoveryInput in{cfg.model, *cfg.xi2, f, build_vector(cfg.W, spectrum, "W")};
    PhiRecoveryOptions opt;
    opt.eps_crit = cfg.tol.eps_crit;
    opt.orth_tol = cfg.tol.orth_tol;
    opt.omega_panels = cfg.tol.quadrature_panels;
    opt.sobolev_eps = cfg.sobolev_eps;
    PhiRecoveryResult r = recover_phi(in, spectrum, opt);
    auto res = check(verify(r.u, cfg.model, spectrum, *f, r.phi, OverDetermination{in.xi2, in.W},
                            verify_options(cfg)),
                     cfg.tol);
    json factors = json::array();
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = spectrum.lambda(k);
        factors.push_back(std::abs((ml_b(cfg.model.rho, lambda, cfg.model.xi0) - cfg.model.alpha) /
                                   ml_b(cfg.model.rho, lambda, in.xi2)));
    }
    result["xi2"] = in.xi2;
    result["critical_set"] = indices_json(r.critical.indices);
    result["phi"] = r.phi.coeffs;
    result["amplification"] = factors;
    result["source_sobolev_norm"] = {{"eps", cfg.sobolev_eps}, {"value", r.source_sobolev_norm}};
    if (cfg.model.alpha == 0.0) {
        const BackwardLimitReport b = backward_limit_check(cfg.model, spectrum, in.xi2, *f, in.W, opt.omega_panels);
        json flagged = json::array();
        for (std::size_t k = 0; k < b.modes.size(); ++k) {
            if (b.modes[k].flagged) flagged.push_back(k + 1);
        }
        result["backward_limit"] = {{"max_factor", b.max_factor}, {"flagged", flagged}};
    }
    result["amplitudes"] = r.u.amplitudes();
    result["free_modes"] = free_modes_json(r.u.free_modes());
    return {std::move(result), std::make_unique<SpectralSolution>(std::move(r.u)), res};
}

void write_artifacts(const RunConfig& cfg, json result, const SpectralSolution& sol, const Tolerated& res) {
    const auto dir = prepare_dir(cfg.out_dir);
    const TimeGrid grid = output_grid(cfg);
    result["solution"] = samples_json(sol, grid);
    result["within_tolerance"] = res.ok;
    write_file(dir / "result.json", dump_json(result));
    std::ostringstream csv;
    write_solution_csv(csv, sol, grid);
    write_file(dir / "solution.csv", csv.str());
    write_file(dir / "residuals.json", dump_json(residual_json(res, cfg.tol)));
}

int run_problem(const RunConfig& cfg, std::ostream& console, bool table) {
    Solved s = solve_configured(cfg);
    write_artifacts(cfg, s.result, *s.solution, s.residuals);
    if (table) {
        print_table(console, s.residuals, cfg.tol);
    } else {
        console << cfg.problem << ": equation " << format_double(s.residuals.report.equation_residual)
                << ", nonlocal " << format_double(s.residuals.report.nonlocal_residual);
        if (s.residuals.report.overdet_residual) {
            console << ", overdet " << format_double(*s.residuals.report.overdet_residual);
        }
        console << (s.residuals.ok ? " (ok)\n" : " (over tolerance)\n");
    }
    log(LogLevel::Debug, "artifacts written to " + cfg.out_dir);
    return s.residuals.ok ? kExitOk : kExitResidual;
}

double mode_relative_error(const SpectralVector& got, const SpectralVector& want) {
    double worst = 0.0;
    for (std::size_t k = 0; k < want.size(); ++k) {
        const double scale = want[k] != 0.0 ? std::abs(want[k]) : 1.0;
        worst = std::max(worst, std::abs(got[k] - want[k]) / scale);
    }
    return worst;
}

int run_roundtrip(const RunConfig& cfg, std::ostream& console) {
    const Spectrum spectrum = build_spectrum(cfg);
    const std::size_t n = spectrum.size();
    const FractionalModel& model = cfg.model;
    const CriticalSet k0 = critical_set(model, spectrum, cfg.tol.eps_crit);
    Rng rng(cfg.seed);

    // Band-limited data with |coefficient| in [0.5, 1.5] / k^2, zero on the
    // critical modes; critical amplitudes drawn at random.
    SpectralVector f_true = SpectralVector::zeros(n);
    SpectralVector phi_true = SpectralVector::zeros(n);
    std::map<std::size_t, double> b_free;
    for (std::size_t k = 0; k < n; ++k) {
        const double decay = 1.0 / static_cast<double>((k + 1) * (k + 1));
        const double fv = rng.sign() * rng.uniform(0.5, 1.5) * decay;
        const double pv = rng.sign() * rng.uniform(0.5, 1.5) * decay;
        const double bv = rng.uniform(-2.0, 2.0);
        if (k0.contains(k)) {
            b_free[k] = bv;
        } else {
            f_true[k] = fv;
            phi_true[k] = pv;
        }
    }
    const double xi1 = cfg.xi1.value_or(0.5 * model.xi0);
    const double xi2 = cfg.xi2.value_or(1.5 * model.xi0 <= model.T ? 1.5 * model.xi0 : 0.5 * model.xi0);
    log(LogLevel::Info, "roundtrip: seed " + std::to_string(cfg.seed) + ", " + std::to_string(n) +
                            " modes, xi1 = " + format_double(xi1) + ", xi2 = " + format_double(xi2));

    ForwardOptions fopt;
    fopt.eps_crit = cfg.tol.eps_crit;
    fopt.orth_tol = cfg.tol.orth_tol;
    fopt.omega_panels = cfg.tol.quadrature_panels;
    auto f = std::make_shared<const SourceTerm>(SourceTerm::constant(f_true));
    const SpectralSolution forward = solve_forward(model, spectrum, f, phi_true, b_free, fopt);

    SourceRecoveryOptions sopt;
    sopt.eps_crit = cfg.tol.eps_crit;
    sopt.orth_tol = cfg.tol.orth_tol;
    sopt.eps_den = cfg.tol.eps_den;
    sopt.allow_xi1_beyond_xi0 = cfg.allow_xi1_beyond_xi0;
    const SpectralVector V = eval_solution(forward, xi1);
    const SourceRecoveryResult rs = recover_source({model, xi1, phi_true, V}, spectrum, sopt);

    PhiRecoveryOptions popt;
    popt.eps_crit = cfg.tol.eps_crit;
    popt.orth_tol = cfg.tol.orth_tol;
    popt.omega_panels = cfg.tol.quadrature_panels;
    popt.sobolev_eps = cfg.sobolev_eps;
    const SpectralVector W = eval_solution(forward, xi2);
    const PhiRecoveryResult rp = recover_phi({model, xi2, f, W}, spectrum, popt);

    const TimeGrid grid = output_grid(cfg);
    double u_scale = 0.0;
    double u_err_source = 0.0;
    double u_err_phi = 0.0;
    for (double t : grid.nodes) {
        const SpectralVector uf = eval_solution(forward, t);
        const SpectralVector us = eval_solution(rs.u, t);
        const SpectralVector up = eval_solution(rp.u, t);
        for (std::size_t k = 0; k < n; ++k) {
            u_scale = std::max(u_scale, std::abs(uf[k]));
            u_err_source = std::max(u_err_source, std::abs(us[k] - uf[k]));
            u_err_phi = std::max(u_err_phi, std::abs(up[k] - uf[k]));
        }
    }
    if (u_scale > 0.0) {
        u_err_source /= u_scale;
        u_err_phi /= u_scale;
    }
    const double f_err = mode_relative_error(rs.f, f_true);
    const double phi_err = mode_relative_error(rp.phi, phi_true);
    const double max_err = std::max({f_err, phi_err, u_err_source, u_err_phi});

    const VerifyOptions vopt = verify_options(cfg);
    const Tolerated res_forward = check(verify(forward, model, spectrum, *f, phi_true, std::nullopt, vopt), cfg.tol);
    const Tolerated res_source = check(verify(rs.u, model, spectrum, rs.u.source(), phi_true,
                                              OverDetermination{xi1, V}, vopt),
                                       cfg.tol);
    const Tolerated res_phi =
        check(verify(rp.u, model, spectrum, *f, rp.phi, OverDetermination{xi2, W}, vopt), cfg.tol);
    const bool residuals_ok = res_forward.ok && res_source.ok && res_phi.ok;
    const bool recovery_ok = max_err <= cfg.tol.recovery;

    json result;
    result["command"] = "roundtrip";
    result["seed"] = cfg.seed;
    result["model"] = model_json(model);
    result["eigenvalues"] = spectrum.eigenvalues();
    result["critical_set"] = indices_json(k0.indices);
    result["xi1"] = xi1;
    result["xi2"] = xi2;
    result["f_true"] = f_true.coeffs;
    result["phi_true"] = phi_true.coeffs;
    result["b_free"] = free_modes_json(b_free);
    result["f_recovered"] = rs.f.coeffs;
    result["phi_recovered"] = rp.phi.coeffs;
    result["errors"] = {{"f_mode_relative", f_err},
                        {"phi_mode_relative", phi_err},
                        {"u_source_relative", u_err_source},
                        {"u_phi_relative", u_err_phi},
                        {"max", max_err},
                        {"tolerance", cfg.tol.recovery}};
    result["within_tolerance"] = residuals_ok && recovery_ok;

    json residuals;
    residuals["forward"] = residual_json(res_forward, cfg.tol);
    residuals["invert_source"] = residual_json(res_source, cfg.tol);
    residuals["invert_phi"] = residual_json(res_phi, cfg.tol);

    const auto dir = prepare_dir(cfg.out_dir);
    write_file(dir / "result.json", dump_json(result));
    std::ostringstream csv;
    write_solution_csv(csv, forward, grid);
    write_file(dir / "solution.csv", csv.str());
    write_file(dir / "residuals.json", dump_json(residuals));

    console << "roundtrip: max recovery error " << format_double(max_err) << " (f " << format_double(f_err)
            << ", phi " << format_double(phi_err) << ")" << (recovery_ok ? "" : " over tolerance")
            << (residuals_ok ? "" : "; residuals over tolerance") << '\n';
    return residuals_ok && recovery_ok ? kExitOk : kExitResidual;
}

int run_critical_scan(const RunConfig& cfg, std::ostream& console) {
    const Spectrum spectrum = build_spectrum(cfg);
    std::vector<double> b(spectrum.size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = ml_b(cfg.model.rho, spectrum.lambda(k), cfg.model.xi0);

    json scan = json::array();
    std::size_t hits = 0;
    for (int j = 1; j <= 999; ++j) {
        const double alpha = j / 1000.0;
        std::vector<std::size_t> k0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (std::abs(b[k] - alpha) <= cfg.tol.scan) k0.push_back(k);
        }
        if (!k0.empty()) {
            ++hits;
            console << "alpha = " << std::fixed << std::setprecision(3) << alpha << std::defaultfloat
                    << "  K0 = {";
            for (std::size_t i = 0; i < k0.size(); ++i) console << (i ? ", " : "") << k0[i] + 1;
            console << "}\n";
        }
        scan.push_back({{"alpha", alpha}, {"K0", indices_json(k0)}});
    }
    json result;
    result["command"] = "critical-scan";
    result["model"] = model_json(cfg.model);
    result["eigenvalues"] = spectrum.eigenvalues();
    result["b_xi0"] = b;
    result["tolerance"] = cfg.tol.scan;
    result["scan"] = scan;
    const auto dir = prepare_dir(cfg.out_dir);
    write_file(dir / "result.json", dump_json(result));
    console << hits << " of 999 alpha values hit a critical mode\n";
    return kExitOk;
}

}  // namespace

int exit_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Config:
        case ErrorCode::InvalidArgument: return kExitConfig;
        case ErrorCode::OrthogonalityViolation: return kExitOrthogonality;
        case ErrorCode::DegenerateDenominator: return kExitDegenerate;
        case ErrorCode::BadGeometry: return kExitBadGeometry;
        case ErrorCode::NearCriticalDenominator: return kExitNearCritical;
        case ErrorCode::Domain:
        case ErrorCode::Underflow: return kExitNumerical;
    }
    return kExitNumerical;
}

const std::vector<std::string>& config_commands() {
    static const std::vector<std::string> commands = {"forward", "invert-source", "invert-phi",
                                                      "verify", "roundtrip", "critical-scan"};
    return commands;
}

int run(const std::string& command, const RunConfig& config, std::ostream& console) {
    if (command == "verify") return run_problem(config, console, true);
    if (command == "roundtrip") return run_roundtrip(config, console);
    if (command == "critical-scan") return run_critical_scan(config, console);
    if (command == "forward" || command == "invert-source" || command == "invert-phi") {
        if (config.problem != command) {
            RunConfig adjusted = config;
            adjusted.problem = command;
            validate_problem(adjusted);
            return run_problem(adjusted, console, false);
        }
        return run_problem(config, console, false);
    }
    fail(ErrorCode::Config, "unknown command \"" + command + "\"");
}

int run_ml_eval(double rho, double mu, const std::vector<double>& z, std::ostream& console) {
    for (double x : z) {
        console << format_double(x) << ' ' << format_double(ml({rho, mu}, x)) << '\n';
    }
    return kExitOk;
}

}  // namespace subdiff
