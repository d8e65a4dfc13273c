#pragma once

namespace subdiff {

/// Parameters of the two-parameter Mittag-Leffler function E_{rho,mu}.
/// Valid for 0 < rho <= 1 and mu > 0.
struct MLParams {
    double rho;
    double mu;
};

/// Evaluation strategy picked for a given argument. Exposed so tests can
/// target each regime on purpose.
enum class MLRegime { Taylor, Integral, Asymptotic };

/// Regime boundaries are expressed in the scaled variable X = |z|^{1/rho},
/// which is what controls both the cancellation in the power series (its
/// terms sum to about exp(X)) and the remainder of the asymptotic series
/// (about exp(-X)).
inline constexpr double kTaylorScaledLimit = 4.0;
inline constexpr double kAsymptoticScaledLimit = 60.0;

/// a(t) switches from its power series to (1 - b(t)) / lambda above this
/// value of lambda * t^rho.
inline constexpr double kAIdentitySwitch = 1e-4;

/// 1 / Gamma(x); entire, exactly zero at the non-positive integers.
double rgamma(double x);

MLRegime ml_regime(MLParams params, double z);

/// E_{rho,mu}(z) for z <= 0. Absolute error is below 1e-12 for |z| <= 1e6.
/// Throws Error(Domain) for z > 0 and Error(InvalidArgument) for invalid
/// parameters.
double ml(MLParams params, double z);

/// b(t) = E_rho(-lambda t^rho).
double ml_b(double rho, double lambda, double t);

/// a(t) = t^rho E_{rho,rho+1}(-lambda t^rho), the integral of the kernel
/// over [0, t]. Satisfies lambda * a(t) + b(t) = 1.
double ml_a(double rho, double lambda, double t);

/// eta^{rho-1} E_{rho,rho}(-lambda eta^rho) for eta > 0; integrably singular
/// at eta = 0 when rho < 1.
double ml_kernel(double rho, double lambda, double eta);

}  // namespace subdiff
