#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subdiff/forward.hpp"
#include "subdiff/spectral.hpp"

namespace subdiff {

/// Failure to read or write a file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Explicit coefficients, or a named function of x projected onto the
/// Dirichlet basis.
struct VectorSpec {
    bool present = false;
    std::vector<double> values;
    std::string function;
    double scale = 1.0;
};

struct SourceSpec {
    enum class Kind { None, Constant, Sampled, PowerLaw };
    Kind kind = Kind::None;
    VectorSpec constant;
    TimeGrid grid;
    std::vector<std::vector<double>> samples;
    std::vector<std::vector<PowerTerm>> terms;
};

struct SpectrumSpec {
    std::optional<std::size_t> dirichlet_modes;
    double length = 1.0;
    std::vector<double> eigenvalues;
};

struct Tolerances {
    double eps_crit = kDefaultEpsCrit;
    double eps_den = 1e-10;
    double orth_tol = 1e-12;
    std::size_t quadrature_panels = kDefaultOmegaPanels;
    double nonlocal = 1e-10;
    double overdet = 1e-10;
    double equation = 5e-2;
    double recovery = 1e-8;
    /// critical-scan reports mode k at alpha when |b_k - alpha| <= scan.
    double scan = 5e-4;
};

struct RunConfig {
    std::string problem = "forward";
    FractionalModel model{};
    std::optional<double> xi1;
    std::optional<double> xi2;
    SpectrumSpec spectrum;
    VectorSpec phi;
    VectorSpec V;
    VectorSpec W;
    SourceSpec f;
    /// 0-based keys; the document uses 1-based mode numbers.
    std::map<std::size_t, double> b_free;
    Tolerances tol;
    std::size_t verify_intervals = 512;
    /// Equation residual start. Defaults to T/10: near t = 0 the solution
    /// behaves like t^rho and the L1 scheme's own error dominates. Empty
    /// ("t_min": "step") means one verification step.
    std::optional<double> t_min;
    std::size_t output_points = 21;
    std::string out_dir = "out";
    bool allow_xi1_beyond_xi0 = false;
    double sobolev_eps = 0.5;
    std::uint64_t seed = 1;
};

/// Parses and validates a JSON configuration. Unknown keys, type mismatches
/// and out-of-range values throw Error(Config) naming the offending key;
/// syntax errors report line and column. An invert-source configuration with
/// xi1 >= xi0 throws Error(BadGeometry) unless allow_xi1_beyond_xi0 is set.
RunConfig parse_config(const std::string& text);

/// Checks the fields the selected problem needs (and BadGeometry cases).
void validate_problem(const RunConfig& config);

/// Reads and parses a file; I/O failures throw IoError.
RunConfig load_config(const std::string& path);

/// Applies --modes; only valid with a Dirichlet spectrum.
void override_modes(RunConfig& config, std::size_t modes);

Spectrum build_spectrum(const RunConfig& config);

/// Resolves a VectorSpec against the spectrum; absent specs give zeros.
SpectralVector build_vector(const VectorSpec& spec, const Spectrum& spectrum, const char* name);

SourceTerm build_source(const RunConfig& config, const Spectrum& spectrum);

/// Names accepted in {"function": ...}.
const std::vector<std::string>& named_functions();

}  // namespace subdiff
