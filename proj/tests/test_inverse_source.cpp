#include <doctest.h>

#include <cmath>
#include <random>

#include "subdiff/forward.hpp"
#include "subdiff/inverse_source.hpp"
#include "subdiff/mittag_leffler.hpp"
#include "test_util.hpp"

using namespace subdiff;
using subdiff::testing::code_of;

TEST_CASE("uniqueness_margin: examples") {
    const FractionalModel m{1.0, 0.5, 1.0, 1.0};
    const double expected =
        std::exp(-0.5) * (1.0 - std::exp(-1.0)) + (1.0 - std::exp(-0.5)) * (0.5 - std::exp(-1.0));
    CHECK(std::abs(uniqueness_margin(m, 1.0, 0.5) - expected) < 1e-15);

    FractionalModel c{0.6, 0.0, 1.0, 0.8};
    c.alpha = ml_b(c.rho, 5.0, c.xi0);
    CHECK(uniqueness_margin(c, 5.0, 0.3) ==
          doctest::Approx(ml_b(0.6, 5.0, 0.3) * ml_a(0.6, 5.0, 0.8)).epsilon(1e-13));
}

TEST_CASE("uniqueness_margin: positive whenever xi1 < xi0 and alpha in (0, 1)") {
    const Spectrum s = dirichlet_spectrum(32, 1.0);
    for (double rho : {0.2, 0.5, 0.8, 1.0}) {
        for (int ia = 1; ia <= 9; ++ia) {
            for (int ix = 1; ix <= 9; ++ix) {
                const FractionalModel m{rho, 0.1 * ia, 1.0, 0.9};
                for (double lambda : s.eigenvalues()) {
                    CHECK(uniqueness_margin(m, lambda, 0.1 * ix * m.xi0) > 0.0);
                }
            }
        }
    }
}

TEST_CASE("uniqueness_margin: both denominator forms agree") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < 500; ++i) {
        const double rho = u(gen), alpha = 2.0 * u(gen) - 0.5, xi0 = u(gen), xi1 = xi0 * u(gen);
        const double lambda = 100.0 * u(gen);
        const FractionalModel m{rho, alpha, 1.0, xi0};
        const double a0 = ml_a(rho, lambda, xi0), b0 = ml_b(rho, lambda, xi0);
        const double a1 = ml_a(rho, lambda, xi1), b1 = ml_b(rho, lambda, xi1);
        const double fraction = a0 * b1 - a1 * b0 + alpha * a1;
        CHECK(std::abs(uniqueness_margin(m, lambda, xi1) - fraction) <= 1e-12);
    }
}

TEST_CASE("find_degenerate_alpha: examples") {
    const FractionalModel m{1.0, 0.0, 3.0, 0.5};
    const auto alpha = find_degenerate_alpha(m, 1.0, 2.0);
    REQUIRE(alpha.has_value());
    const double a0 = 1.0 - std::exp(-0.5), b0 = std::exp(-0.5);
    const double a1 = 1.0 - std::exp(-2.0), b1 = std::exp(-2.0);
    CHECK(*alpha == doctest::Approx((a1 * b0 - a0 * b1) / a1).epsilon(1e-14));
    CHECK(*alpha > 0.0);
    CHECK(*alpha < 1.0);
    FractionalModel at = m;
    at.alpha = *alpha;
    CHECK(std::abs(uniqueness_margin(at, 1.0, 2.0)) <= 1e-12);
    CHECK_FALSE(find_degenerate_alpha(m, 1.0, 0.5).has_value());
    for (double lambda : {0.1, 1.0, 10.0, 100.0}) {
        CHECK_FALSE(find_degenerate_alpha(m, lambda, 0.25).has_value());
    }
}

TEST_CASE("recover_source: zero data") {
    const Spectrum s = dirichlet_spectrum(6, 1.0);
    const FractionalModel m{0.5, 0.4, 1.0, 1.0};
    const auto r = recover_source({m, 0.5, SpectralVector::zeros(6), SpectralVector::zeros(6)}, s);
    for (double f : r.f.coeffs) CHECK(f == 0.0);
    for (double t : {0.0, 0.5, 1.0}) {
        for (double u : eval_solution(r.u, t).coeffs) CHECK(u == 0.0);
    }
}

TEST_CASE("recover_source: round trip") {
    const Spectrum s = dirichlet_spectrum(10, 1.0);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (double alpha : {-1.0, 0.3, 0.8, 2.0}) {
        const FractionalModel m{0.65, alpha, 1.0, 0.8};
        SpectralVector f(std::vector<double>(10)), phi(std::vector<double>(10));
        for (std::size_t k = 0; k < 10; ++k) {
            f[k] = u(gen) / ((k + 1) * (k + 1));
            phi[k] = -u(gen) / ((k + 1) * (k + 1));
        }
        const auto fwd = solve_forward(m, s, SourceTerm::constant(f), phi);
        const double xi1 = 0.4;
        const auto r = recover_source({m, xi1, phi, eval_solution(fwd, xi1)}, s);
        for (std::size_t k = 0; k < 10; ++k) CHECK(std::abs(r.f[k] - f[k]) <= 1e-8 * std::abs(f[k]));
        for (double t : {0.0, 0.1, 0.4, 0.8, 1.0}) {
            for (std::size_t k = 0; k < 10; ++k) {
                const double ref = fwd.mode_value(k, t);
                CHECK(std::abs(r.u.mode_value(k, t) - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
            }
        }
    }
}

TEST_CASE("recover_source: critical mode is pinned by V") {
    const Spectrum s = dirichlet_spectrum(6, 1.0);
    FractionalModel m{0.6, 0.0, 1.0, 0.7};
    m.alpha = ml_b(m.rho, s.lambda(2), m.xi0);
    SpectralVector f({1.0, 0.5, 0.0, 0.3, 0.2, 0.1});
    SpectralVector phi({0.2, 0.1, 0.0, -0.1, 0.0, 0.05});
    const double xi1 = 0.35;
    for (double b : {7.0, 0.0}) {
        const auto fwd = solve_forward(m, s, SourceTerm::constant(f), phi, {{2, b}});
        const SpectralVector V = eval_solution(fwd, xi1);
        const auto r = recover_source({m, xi1, phi, V}, s);
        REQUIRE(r.critical.indices == std::vector<std::size_t>{2});
        CHECK(r.f[2] == 0.0);
        CHECK(std::abs(r.u.mode_value(2, 0.0) - b) <= 1e-8);
        CHECK(std::abs(r.u.mode_value(2, xi1) - V[2]) <= 1e-14);
        CHECK(std::abs(r.u.mode_value(2, m.xi0) - m.alpha * r.u.mode_value(2, 0.0)) <= 1e-12);
    }
}

TEST_CASE("recover_source: errors") {
    const Spectrum s = dirichlet_spectrum(4, 1.0);
    const FractionalModel m{0.5, 0.5, 1.0, 0.6};
    const SpectralVector z = SpectralVector::zeros(4);
    CHECK(code_of([&] { recover_source({m, 0.6, z, z}, s); }) == ErrorCode::BadGeometry);
    CHECK(code_of([&] { recover_source({m, 0.8, z, z}, s); }) == ErrorCode::BadGeometry);
    CHECK(code_of([&] { recover_source({m, 1.5, z, z}, s, {.allow_xi1_beyond_xi0 = true}); }) ==
          ErrorCode::BadGeometry);

    FractionalModel c = m;
    c.alpha = ml_b(c.rho, s.lambda(1), c.xi0);
    SpectralVector phi = z;
    phi[1] = 0.1;
    CHECK(code_of([&] { recover_source({c, 0.3, phi, z}, s); }) == ErrorCode::OrthogonalityViolation);

    const Spectrum one({1.0});
    FractionalModel d{1.0, 0.0, 3.0, 0.5};
    d.alpha = *find_degenerate_alpha(d, 1.0, 2.0);
    SourceRecoveryOptions opt;
    opt.allow_xi1_beyond_xi0 = true;
    CHECK(code_of([&] { recover_source({d, 2.0, SpectralVector({1.0}), SpectralVector({1.0})}, one, opt); }) ==
          ErrorCode::DegenerateDenominator);
}
