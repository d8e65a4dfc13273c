#include "subdiff/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "subdiff/error.hpp"

namespace subdiff {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCode::Config, what); }

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) config_error((path.empty() ? "document" : path) + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return it.key() == a; });
        if (!known) config_error("unknown key \"" + join(path, it.key()) + "\"");
    }
}

double number(const json& v, const std::string& name) {
    if (!v.is_number()) config_error(name + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(name + " must be finite");
    return d;
}

std::size_t count(const json& v, const std::string& name) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        config_error(name + " must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::vector<double> number_list(const json& v, const std::string& name) {
    if (!v.is_array()) config_error(name + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(number(v[i], name + "[" + std::to_string(i) + "]"));
    }
    return out;
}

const std::vector<std::string> kFunctions = {"zero", "sine_mix", "parabola", "bump"};

double named_value(const std::string& name, double x, double length) {
    const double y = x / length;
    if (name == "sine_mix") {
        return std::sin(std::numbers::pi * y) + 0.5 * std::sin(3.0 * std::numbers::pi * y);
    }
    if (name == "parabola") return 4.0 * y * (1.0 - y);
    if (name == "bump") return std::pow(std::sin(std::numbers::pi * y), 3);
    return 0.0;
}

VectorSpec vector_spec(const json& v, const std::string& name) {
    VectorSpec spec;
    spec.present = true;
    if (v.is_array()) {
        spec.values = number_list(v, name);
        return spec;
    }
    check_keys(v, name, {"function", "scale"});
    if (!v.contains("function") || !v["function"].is_string()) {
        config_error(name + ".function must name a test function");
    }
    spec.function = v["function"].get<std::string>();
    if (std::find(kFunctions.begin(), kFunctions.end(), spec.function) == kFunctions.end()) {
        config_error(name + ".function \"" + spec.function + "\" is not a known test function");
    }
    if (v.contains("scale")) spec.scale = number(v["scale"], name + ".scale");
    return spec;
}

SourceSpec source_spec(const json& v, double horizon) {
    SourceSpec spec;
    if (v.is_array() || (v.is_object() && v.contains("function"))) {
        spec.kind = SourceSpec::Kind::Constant;
        spec.constant = vector_spec(v, "f");
        return spec;
    }
    check_keys(v, "f", {"samples", "power_law"});
    if (v.contains("samples") == v.contains("power_law")) {
        config_error("f must give exactly one of \"samples\" or \"power_law\"");
    }
    if (v.contains("samples")) {
        const json& s = v["samples"];
        check_keys(s, "f.samples", {"times", "intervals", "values"});
        if (s.contains("times") == s.contains("intervals")) {
            config_error("f.samples needs exactly one of \"times\" or \"intervals\"");
        }
        if (s.contains("times")) {
            spec.grid.nodes = number_list(s["times"], "f.samples.times");
        } else {
            const std::size_t m = count(s["intervals"], "f.samples.intervals");
            if (m == 0) config_error("f.samples.intervals must be positive");
            spec.grid = TimeGrid::uniform(horizon, m);
        }
        try {
            spec.grid.validate();
        } catch (const Error& e) {
            config_error(std::string("f.samples.times: ") + e.what());
        }
        if (!s.contains("values") || !s["values"].is_array()) {
            config_error("f.samples.values must be an array with one row per mode");
        }
        for (std::size_t k = 0; k < s["values"].size(); ++k) {
            spec.samples.push_back(
                number_list(s["values"][k], "f.samples.values[" + std::to_string(k) + "]"));
        }
        spec.kind = SourceSpec::Kind::Sampled;
        return spec;
    }
    const json& p = v["power_law"];
    if (!p.is_array()) config_error("f.power_law must be an array with one row per mode");
    for (std::size_t k = 0; k < p.size(); ++k) {
        const std::string row = "f.power_law[" + std::to_string(k) + "]";
        if (!p[k].is_array()) config_error(row + " must be an array of terms");
        std::vector<PowerTerm> terms;
        for (std::size_t i = 0; i < p[k].size(); ++i) {
            const std::string name = row + "[" + std::to_string(i) + "]";
            check_keys(p[k][i], name, {"coeff", "exponent"});
            if (!p[k][i].contains("coeff") || !p[k][i].contains("exponent")) {
                config_error(name + " needs \"coeff\" and \"exponent\"");
            }
            const double e = number(p[k][i]["exponent"], name + ".exponent");
            if (e < 0.0) config_error(name + ".exponent must be >= 0");
            terms.push_back({number(p[k][i]["coeff"], name + ".coeff"), e});
        }
        spec.terms.push_back(std::move(terms));
    }
    spec.kind = SourceSpec::Kind::PowerLaw;
    return spec;
}

std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

void require_range(bool ok, const std::string& what) {
    if (!ok) config_error(what);
}

}  // namespace

const std::vector<std::string>& named_functions() { return kFunctions; }

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error("malformed JSON at " + locate(text, e.byte) + ": " + e.what());
    }
    check_keys(doc, "", {"problem", "model", "xi1", "xi2", "spectrum", "phi", "V", "W", "f", "b_free",
                         "tolerances", "verify", "output", "allow_xi1_beyond_xi0", "sobolev_eps", "seed"});

    RunConfig cfg;
    if (doc.contains("problem")) {
        if (!doc["problem"].is_string()) config_error("problem must be a string");
        cfg.problem = doc["problem"].get<std::string>();
        if (cfg.problem != "forward" && cfg.problem != "invert-source" && cfg.problem != "invert-phi") {
            config_error("problem must be one of forward, invert-source, invert-phi");
        }
    }

    if (!doc.contains("model")) config_error("missing required key \"model\"");
    const json& m = doc["model"];
    check_keys(m, "model", {"rho", "alpha", "T", "xi0"});
    for (const char* key : {"rho", "alpha", "T", "xi0"}) {
        if (!m.contains(key)) config_error(std::string("missing required key \"model.") + key + "\"");
    }
    cfg.model.rho = number(m["rho"], "model.rho");
    cfg.model.alpha = number(m["alpha"], "model.alpha");
    cfg.model.T = number(m["T"], "model.T");
    cfg.model.xi0 = number(m["xi0"], "model.xi0");
    require_range(cfg.model.rho > 0.0 && cfg.model.rho <= 1.0, "model.rho = " + std::to_string(cfg.model.rho) +
                                                                   " out of range: rho must lie in (0, 1]");
    require_range(cfg.model.T > 0.0, "model.T out of range: T must be positive");
    require_range(cfg.model.xi0 > 0.0 && cfg.model.xi0 <= cfg.model.T,
                  "model.xi0 out of range: xi0 must lie in (0, T]");

    cfg.t_min = 0.1 * cfg.model.T;

    if (doc.contains("xi1")) {
        cfg.xi1 = number(doc["xi1"], "xi1");
        require_range(*cfg.xi1 > 0.0 && *cfg.xi1 <= cfg.model.T, "xi1 out of range: xi1 must lie in (0, T]");
    }
    if (doc.contains("xi2")) {
        cfg.xi2 = number(doc["xi2"], "xi2");
        require_range(*cfg.xi2 > 0.0 && *cfg.xi2 <= cfg.model.T, "xi2 out of range: xi2 must lie in (0, T]");
    }

    if (!doc.contains("spectrum")) config_error("missing required key \"spectrum\"");
    const json& s = doc["spectrum"];
    check_keys(s, "spectrum", {"type", "N", "L", "eigenvalues"});
    const std::string type = s.contains("type") && s["type"].is_string() ? s["type"].get<std::string>() : "";
    if (type == "dirichlet") {
        if (!s.contains("N")) config_error("missing required key \"spectrum.N\"");
        if (s.contains("eigenvalues")) config_error("spectrum.eigenvalues is not used with type dirichlet");
        cfg.spectrum.dirichlet_modes = count(s["N"], "spectrum.N");
        require_range(*cfg.spectrum.dirichlet_modes >= 1, "spectrum.N out of range: N must be >= 1");
        if (s.contains("L")) cfg.spectrum.length = number(s["L"], "spectrum.L");
        require_range(cfg.spectrum.length > 0.0, "spectrum.L out of range: L must be positive");
    } else if (type == "explicit") {
        if (!s.contains("eigenvalues")) config_error("missing required key \"spectrum.eigenvalues\"");
        if (s.contains("N") || s.contains("L")) config_error("spectrum.N and spectrum.L apply to type dirichlet");
        cfg.spectrum.eigenvalues = number_list(s["eigenvalues"], "spectrum.eigenvalues");
        require_range(!cfg.spectrum.eigenvalues.empty(), "spectrum.eigenvalues must not be empty");
        for (std::size_t k = 0; k < cfg.spectrum.eigenvalues.size(); ++k) {
            require_range(cfg.spectrum.eigenvalues[k] > 0.0,
                          "spectrum.eigenvalues[" + std::to_string(k) + "] must be positive");
            require_range(k == 0 || cfg.spectrum.eigenvalues[k] >= cfg.spectrum.eigenvalues[k - 1],
                          "spectrum.eigenvalues must be non-decreasing");
        }
    } else {
        config_error("spectrum.type must be \"dirichlet\" or \"explicit\"");
    }

    if (doc.contains("phi")) cfg.phi = vector_spec(doc["phi"], "phi");
    if (doc.contains("V")) cfg.V = vector_spec(doc["V"], "V");
    if (doc.contains("W")) cfg.W = vector_spec(doc["W"], "W");
    if (doc.contains("f")) cfg.f = source_spec(doc["f"], cfg.model.T);

    if (doc.contains("b_free")) {
        const json& b = doc["b_free"];
        if (!b.is_object()) config_error("b_free must map mode numbers to values");
        for (auto it = b.begin(); it != b.end(); ++it) {
            std::size_t k = 0;
            try {
                std::size_t used = 0;
                k = std::stoul(it.key(), &used);
                if (used != it.key().size()) throw std::invalid_argument("trailing text");
            } catch (const std::exception&) {
                config_error("b_free key \"" + it.key() + "\" is not a mode number");
            }
            require_range(k >= 1, "b_free mode numbers start at 1");
            cfg.b_free[k - 1] = number(it.value(), "b_free." + it.key());
        }
    }

    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        check_keys(t, "tolerances", {"eps_crit", "eps_den", "orth_tol", "quadrature_panels", "nonlocal",
                                     "overdet", "equation", "recovery", "scan"});
        auto positive = [&](const char* key, double& slot) {
            if (!t.contains(key)) return;
            slot = number(t[key], std::string("tolerances.") + key);
            require_range(slot > 0.0, std::string("tolerances.") + key + " out of range: must be positive");
        };
        positive("eps_crit", cfg.tol.eps_crit);
        positive("eps_den", cfg.tol.eps_den);
        positive("orth_tol", cfg.tol.orth_tol);
        positive("nonlocal", cfg.tol.nonlocal);
        positive("overdet", cfg.tol.overdet);
        positive("equation", cfg.tol.equation);
        positive("recovery", cfg.tol.recovery);
        positive("scan", cfg.tol.scan);
        if (t.contains("quadrature_panels")) {
            cfg.tol.quadrature_panels = count(t["quadrature_panels"], "tolerances.quadrature_panels");
            require_range(cfg.tol.quadrature_panels >= 1, "tolerances.quadrature_panels must be >= 1");
        }
    }

    if (doc.contains("verify")) {
        const json& v = doc["verify"];
        check_keys(v, "verify", {"grid", "t_min"});
        if (v.contains("grid")) {
            cfg.verify_intervals = count(v["grid"], "verify.grid");
            require_range(cfg.verify_intervals >= 2, "verify.grid out of range: must be >= 2");
        }
        if (v.contains("t_min")) {
            if (v["t_min"].is_string() && v["t_min"].get<std::string>() == "step") {
                cfg.t_min.reset();
            } else {
                cfg.t_min = number(v["t_min"], "verify.t_min");
                require_range(*cfg.t_min > 0.0 && *cfg.t_min <= cfg.model.T,
                              "verify.t_min out of range: must lie in (0, T]");
            }
        }
    }

    if (doc.contains("output")) {
        const json& o = doc["output"];
        check_keys(o, "output", {"dir", "points"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) config_error("output.dir must be a string");
            cfg.out_dir = o["dir"].get<std::string>();
        }
        if (o.contains("points")) {
            cfg.output_points = count(o["points"], "output.points");
            require_range(cfg.output_points >= 2, "output.points out of range: must be >= 2");
        }
    }

    if (doc.contains("allow_xi1_beyond_xi0")) {
        if (!doc["allow_xi1_beyond_xi0"].is_boolean()) config_error("allow_xi1_beyond_xi0 must be a boolean");
        cfg.allow_xi1_beyond_xi0 = doc["allow_xi1_beyond_xi0"].get<bool>();
    }
    if (doc.contains("sobolev_eps")) {
        cfg.sobolev_eps = number(doc["sobolev_eps"], "sobolev_eps");
        require_range(cfg.sobolev_eps > 0.0 && cfg.sobolev_eps < 1.0,
                      "sobolev_eps out of range: must lie in (0, 1)");
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) config_error("seed must be a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }

    validate_problem(cfg);
    return cfg;
}

void validate_problem(const RunConfig& config) {
    if (config.problem == "invert-source") {
        if (!config.xi1) config_error("invert-source needs \"xi1\"");
        if (!config.V.present) config_error("invert-source needs \"V\"");
        if (config.f.kind != SourceSpec::Kind::None) config_error("invert-source recovers f; do not give \"f\"");
        if (*config.xi1 >= config.model.xi0 && !config.allow_xi1_beyond_xi0) {
            fail(ErrorCode::BadGeometry, "xi1 must be smaller than xi0 for source recovery");
        }
    }
    if (config.problem == "invert-phi") {
        if (!config.xi2) config_error("invert-phi needs \"xi2\"");
        if (!config.W.present) config_error("invert-phi needs \"W\"");
        if (config.phi.present) config_error("invert-phi recovers phi; do not give \"phi\"");
        if (std::abs(*config.xi2 - config.model.xi0) <= 1e-14 * config.model.xi0) {
            fail(ErrorCode::BadGeometry, "xi2 must differ from xi0 for phi recovery");
        }
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in && !in.eof()) throw IoError("cannot read config file " + path);
    return parse_config(buf.str());
}

void override_modes(RunConfig& config, std::size_t modes) {
    if (!config.spectrum.dirichlet_modes) {
        config_error("--modes applies only to a dirichlet spectrum");
    }
    if (modes == 0) config_error("--modes must be positive");
    config.spectrum.dirichlet_modes = modes;
}

Spectrum build_spectrum(const RunConfig& config) {
    if (config.spectrum.dirichlet_modes) {
        return dirichlet_spectrum(*config.spectrum.dirichlet_modes, config.spectrum.length);
    }
    return Spectrum(config.spectrum.eigenvalues);
}

SpectralVector build_vector(const VectorSpec& spec, const Spectrum& spectrum, const char* name) {
    const std::size_t n = spectrum.size();
    if (!spec.present) return SpectralVector::zeros(n);
    if (spec.function.empty()) {
        if (spec.values.size() != n) {
            config_error(std::string(name) + " has " + std::to_string(spec.values.size()) +
                         " coefficients, spectrum has " + std::to_string(n) + " modes");
        }
        return SpectralVector(spec.values);
    }
    if (!spectrum.realization()) {
        config_error(std::string(name) + ": named functions need a dirichlet spectrum");
    }
    const double length = spectrum.realization()->length;
    const std::size_t points = std::max<std::size_t>(8 * n + 1, 2049);
    std::vector<double> samples(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double x = length * static_cast<double>(j) / static_cast<double>(points - 1);
        samples[j] = spec.scale * named_value(spec.function, x, length);
    }
    return fourier_coeffs(samples, spectrum);
}

SourceTerm build_source(const RunConfig& config, const Spectrum& spectrum) {
    const std::size_t n = spectrum.size();
    switch (config.f.kind) {
        case SourceSpec::Kind::None: return SourceTerm::zero(n);
        case SourceSpec::Kind::Constant: return SourceTerm::constant(build_vector(config.f.constant, spectrum, "f"));
        case SourceSpec::Kind::Sampled:
            if (config.f.samples.size() != n) {
                config_error("f.samples.values has " + std::to_string(config.f.samples.size()) +
                             " rows, spectrum has " + std::to_string(n) + " modes");
            }
            for (std::size_t k = 0; k < n; ++k) {
                if (config.f.samples[k].size() != config.f.grid.size()) {
                    config_error("f.samples.values[" + std::to_string(k) + "] does not match the sample times");
                }
            }
            if (config.f.grid.end() < config.model.T * (1.0 - 1e-12)) {
                config_error("f.samples must cover [0, T]");
            }
            return SourceTerm::sampled(config.f.grid, config.f.samples);
        case SourceSpec::Kind::PowerLaw:
            if (config.f.terms.size() != n) {
                config_error("f.power_law has " + std::to_string(config.f.terms.size()) +
                             " rows, spectrum has " + std::to_string(n) + " modes");
            }
            return SourceTerm::power_law(config.f.terms);
    }
    return SourceTerm::zero(n);
}

}  // namespace subdiff
