#include "subdiff/mittag_leffler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "subdiff/error.hpp"

namespace subdiff {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(pi x) with exact zeros at the integers.
double sin_pi(double x) {
    const double n = std::round(x);
    const double r = x - n;
    const double s = std::sin(kPi * r);
    return std::fmod(n, 2.0) == 0.0 ? s : -s;
}

double cos_pi(double x) { return sin_pi(x + 0.5); }

void check_params(MLParams p) {
    if (!(p.rho > 0.0 && p.rho <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "Mittag-Leffler order rho must lie in (0, 1]");
    }
    if (!(p.mu > 0.0) || !std::isfinite(p.mu)) {
        fail(ErrorCode::InvalidArgument, "Mittag-Leffler parameter mu must be positive");
    }
}

// One integrator per thread: it extends its abscissa tables lazily.
boost::math::quadrature::tanh_sinh<double>& quadrature() {
    thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
    return integrator;
}

constexpr double kQuadTol = 1e-12;
constexpr double kAsymptoticTarget = 1e-15;

// Power series. The reciprocal gamma values depend only on (rho, mu), and
// the kernels call this repeatedly with the same pair, so they are cached.
double ml_taylor(MLParams p, double x) {
    struct Cache {
        double rho = -1.0;
        double mu = -1.0;
        std::vector<double> rg;
    };
    thread_local Cache cache;
    if (cache.rho != p.rho || cache.mu != p.mu) {
        cache.rho = p.rho;
        cache.mu = p.mu;
        cache.rg.clear();
    }

    const double scaled = std::pow(x, 1.0 / p.rho);
    double sum = 0.0;
    double power = 1.0;
    for (std::size_t n = 0; n < 20000; ++n) {
        if (n == cache.rg.size()) cache.rg.push_back(rgamma(p.rho * n + p.mu));
        const double term = power * cache.rg[n];
        sum += (n % 2 == 0) ? term : -term;
        const double arg = p.rho * n + p.mu;
        if (arg > scaled + 2.0 && std::abs(term) < 1e-18) break;
        if (cache.rg[n] == 0.0 && arg > 170.0) break;
        power *= x;
    }
    return sum;
}

// Algebraic expansion E_{rho,mu}(-x) ~ sum_k (-1)^{k+1} x^{-k} / Gamma(mu - rho k).
// Returns nullopt when the smallest term never drops below the target, which
// happens for small rho where x = X^rho stays close to 1.
std::optional<double> ml_asymptotic(MLParams p, double x) {
    double sum = 0.0;
    double inv_power = 1.0;
    double previous_envelope = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 4000; ++k) {
        inv_power /= x;
        const double arg = p.mu - p.rho * k;
        const double rg = rgamma(arg);
        const double term = inv_power * rg;
        sum += (k % 2 == 1) ? term : -term;
        // |1/Gamma(z)| <= Gamma(1 - z) / pi for z <= 0; track that bound (also
        // on (0, 1), where 1/Gamma vanishes at 0) so zeros of 1/Gamma do not
        // trigger an early stop.
        const double envelope =
            arg < 1.0 ? inv_power * std::exp(std::lgamma(1.0 - arg)) / kPi
                      : std::abs(term);
        if (envelope < 1e-17) return sum;
        if (envelope > previous_envelope && k > 8) break;
        previous_envelope = envelope;
    }
    if (previous_envelope < kAsymptoticTarget) return sum;
    return std::nullopt;
}

// rho = 1, 1 < mu <= 2. With u = v^{1/(mu-1)} the integral
//   E_{1,mu}(-x) = 1/Gamma(mu-1) int_0^1 exp(-x(1-u)) u^{mu-2} du
// loses its endpoint singularity.
double ml_rho_one_midrange(double mu, double x) {
    if (mu == 1.0) return std::exp(-x);
    if (mu < 1.0) return rgamma(mu) - x * ml_rho_one_midrange(mu + 1.0, x);
    if (mu > 2.0) return (rgamma(mu - 1.0) - ml_rho_one_midrange(mu - 1.0, x)) / x;
    const double q = 1.0 / (mu - 1.0);
    auto integrand = [x, q](double v) { return std::exp(-x * (1.0 - std::pow(v, q))); };
    return quadrature().integrate(integrand, 0.0, 1.0, kQuadTol) * rgamma(mu);
}

// Hankel contour collapsed onto the negative real axis; valid for
// 0 < rho < 1 and mu < 1 + rho:
//   E(-x) = 1/pi int_0^inf e^{-r} r^{rho-mu}
//           (r^rho sin(pi mu) - x sin(pi(rho-mu))) / (r^{2rho} + 2x r^rho cos(pi rho) + x^2) dr
double ml_integral(MLParams p, double x) {
    const double rho = p.rho;
    const double mu = p.mu;
    const double s_mu = sin_pi(mu);
    const double s_rm = sin_pi(rho - mu);
    const double c_rho = cos_pi(rho);

    // Everything except the r^{rho-mu} factor.
    auto regular = [=](double r) {
        const double rr = std::pow(r, rho);
        const double shifted = rr + x * c_rho;
        const double den = shifted * shifted + x * x * (1.0 - c_rho * c_rho);
        return std::exp(-r) * (rr * s_mu - x * s_rm) / den;
    };
    auto integrand = [=](double r) {
        if (r <= 0.0) return 0.0;
        return std::pow(r, rho - mu) * regular(r);
    };
    // r = u^q absorbs r^{rho-mu} into the Jacobian on the first segment.
    const double q = 1.0 / (1.0 + rho - mu);
    auto near_zero = [=](double u) { return q * regular(std::pow(u, q)); };

    // e^{-60} makes the tail negligible against the 1e-12 target.
    constexpr double upper = 60.0;
    std::vector<double> cuts{0.0, 1.0, upper};
    if (c_rho < 0.0) {
        // The denominator nearly vanishes at r^rho = -x cos(pi rho) when rho
        // approaches 1; make that point a segment endpoint.
        const double peak = std::pow(-x * c_rho, 1.0 / rho);
        if (peak < upper && peak != 1.0) cuts.push_back(peak);
    }
    std::sort(cuts.begin(), cuts.end());

    double value =
        quadrature().integrate(near_zero, 0.0, std::pow(cuts[1], 1.0 / q), kQuadTol);
    for (std::size_t i = 1; i + 1 < cuts.size(); ++i) {
        value += quadrature().integrate(integrand, cuts[i], cuts[i + 1], kQuadTol);
    }
    return value / kPi;
}

double ml_midrange(MLParams p, double x) {
    if (p.rho == 1.0) return ml_rho_one_midrange(p.mu, x);
    if (p.mu > 1.0) {
        // E_{rho,mu}(z) = (E_{rho,mu-rho}(z) - 1/Gamma(mu-rho)) / z, with |z| > 1 here.
        const double lower = ml_midrange({p.rho, p.mu - p.rho}, x);
        return (rgamma(p.mu - p.rho) - lower) / x;
    }
    return ml_integral(p, x);
}

}  // namespace

double rgamma(double x) {
    if (std::isnan(x)) return x;
    if (x > 0.0) {
        if (x > 171.0) return 0.0;
        return 1.0 / std::tgamma(x);
    }
    if (x == std::floor(x)) return 0.0;
    // Reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi.
    const double g = std::tgamma(1.0 - x);
    return sin_pi(x) * g / kPi;
}

MLRegime ml_regime(MLParams params, double z) {
    const double scaled = std::pow(-z, 1.0 / params.rho);
    if (scaled <= kTaylorScaledLimit) return MLRegime::Taylor;
    if (scaled >= kAsymptoticScaledLimit) return MLRegime::Asymptotic;
    return MLRegime::Integral;
}

double ml(MLParams params, double z) {
    check_params(params);
    if (std::isnan(z)) fail(ErrorCode::InvalidArgument, "Mittag-Leffler argument is NaN");
    if (z > 0.0) fail(ErrorCode::Domain, "Mittag-Leffler argument must be non-positive");
    if (z == 0.0) return rgamma(params.mu);
    if (std::isinf(z)) return 0.0;

    const double x = -z;
    if (params.rho == 1.0 && params.mu == 1.0) return std::exp(z);
    switch (ml_regime(params, z)) {
        case MLRegime::Taylor: return ml_taylor(params, x);
        case MLRegime::Asymptotic:
            if (auto value = ml_asymptotic(params, x)) return *value;
            return ml_midrange(params, x);
        case MLRegime::Integral: return ml_midrange(params, x);
    }
    return 0.0;
}

namespace {

void check_rho_lambda(double rho, double lambda) {
    if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorCode::InvalidArgument, "rho must lie in (0, 1]");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        fail(ErrorCode::InvalidArgument, "eigenvalue must be positive and finite");
    }
}

}  // namespace

double ml_b(double rho, double lambda, double t) {
    check_rho_lambda(rho, lambda);
    if (!(t >= 0.0)) fail(ErrorCode::Domain, "b(t) requires t >= 0");
    if (t == 0.0) return 1.0;
    return ml({rho, 1.0}, -lambda * std::pow(t, rho));
}

double ml_a(double rho, double lambda, double t) {
    check_rho_lambda(rho, lambda);
    if (!(t >= 0.0)) fail(ErrorCode::Domain, "a(t) requires t >= 0");
    if (t == 0.0) return 0.0;
    const double tr = std::pow(t, rho);
    const double x = lambda * tr;
    if (x > kAIdentitySwitch) return (1.0 - ml({rho, 1.0}, -x)) / lambda;
    return tr * ml({rho, rho + 1.0}, -x);
}

double ml_kernel(double rho, double lambda, double eta) {
    check_rho_lambda(rho, lambda);
    if (!(eta > 0.0)) fail(ErrorCode::Domain, "kernel requires eta > 0");
    const double er = std::pow(eta, rho);
    return er / eta * ml({rho, rho}, -lambda * er);
}

}  // namespace subdiff
