#include <doctest.h>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <complex>
#include <random>

#include "nhrmt/errors.hpp"
#include "nhrmt/specfun.hpp"

using namespace nhrmt;
using cd = std::complex<double>;

namespace {

// Oracle for erf(z): plain Taylor series in long double, used only for
// moderate |z| where the cancellation stays harmless.
std::complex<long double> erf_taylor_oracle(std::complex<long double> z) {
    std::complex<long double> sum = z, power = z;
    const std::complex<long double> w = -z * z;
    for (int k = 1; k < 400; ++k) {
        power *= w / static_cast<long double>(k);
        sum += power / static_cast<long double>(2 * k + 1);
    }
    return sum * (2.0L / std::sqrt(3.14159265358979323846264338327950288L));
}

// Oracle for Q(n,x) at integer n: e^{-x} sum_{j<n} x^j/j!, summed in long double.
long double q_integer_oracle(int n, long double x) {
    long double term = std::exp(-x), sum = 0.0L;
    for (int j = 0; j < n; ++j) {
        sum += term;
        term *= x / (j + 1);
    }
    return sum;
}

}  // namespace

TEST_CASE("regularized_gamma_q examples") {
    CHECK(regularized_gamma_q(5.0, 0.0) == 1.0);
    CHECK(regularized_gamma_q(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    double q = regularized_gamma_q(1000.0, 1000.0);
    CHECK(std::abs(q - 0.5) < 0.02);
    CHECK(q == doctest::Approx(static_cast<double>(q_integer_oracle(1000, 1000.0L))).epsilon(1e-11));
}

TEST_CASE("regularized_gamma_q domain errors") {
    CHECK_THROWS_AS(regularized_gamma_q(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(regularized_gamma_q(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(regularized_gamma_q(1.0, -0.5), DomainError);
    CHECK_THROWS_AS(lower_gamma(0.0, 1.0), DomainError);
}

TEST_CASE("incomplete gamma agrees with Boost and is monotone") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(0.1, 300.0), ux(0.0, 400.0);
    for (int i = 0; i < 2000; ++i) {
        double a = ua(rng), x = ux(rng);
        double q = regularized_gamma_q(a, x);
        double ref = boost::math::gamma_q(a, x);
        CHECK(std::abs(q - ref) <= 1e-12 + 1e-11 * ref);
        double p = regularized_gamma_p(a, x);
        CHECK(std::abs(p - boost::math::gamma_p(a, x)) <= 1e-12 + 1e-11 * p);
        if (a <= 170.0) CHECK(std::abs(q + lower_gamma(a, x) / std::tgamma(a) - 1.0) < 1e-12);
    }
    for (double a : {0.5, 3.0, 40.0, 500.0}) {
        double prev = 1.0;
        for (double x = 0.0; x < 3 * a + 20; x += 0.37) {
            double q = regularized_gamma_q(a, x);
            CHECK(q <= prev + 1e-15);
            CHECK(q >= 0.0);
            prev = q;
        }
    }
}

TEST_CASE("log regularized gamma stays finite where P or Q underflow") {
    double lp = log_regularized_gamma_p(600.0, 1.0);
    CHECK(lp == doctest::Approx(600.0 * std::log(1.0) - 1.0 - std::lgamma(601.0) +
                                std::log(1.0 + 1.0 / 601.0 + 1.0 / (601.0 * 602.0)))
                    .epsilon(1e-10));
    double lq = log_regularized_gamma_q(5.0, 2000.0);
    CHECK(std::isfinite(lq));
    double x = 2000.0;
    double poly = 1.0 + x + x * x / 2.0 + x * x * x / 6.0 + x * x * x * x / 24.0;
    CHECK(lq == doctest::Approx(-x + std::log(poly)).epsilon(1e-13));
    CHECK(std::exp(log_regularized_gamma_q(3.0, 2.0)) == doctest::Approx(boost::math::gamma_q(3.0, 2.0)).epsilon(1e-13));
}

TEST_CASE("lower_gamma examples") {
    CHECK(lower_gamma(2.0, 0.0) == 0.0);
    CHECK(lower_gamma(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    // integration by parts: γ(3,x) = 2 - e^{-x}(x^2 + 2x + 2)
    CHECK(lower_gamma(3.0, 2.0) == doctest::Approx(2.0 - 10.0 * std::exp(-2.0)).epsilon(1e-13));
    double prev = 0.0;
    for (double x = 0.0; x < 30.0; x += 0.25) {
        double g = lower_gamma(4.5, x);
        CHECK(g >= prev);
        prev = g;
    }
}

TEST_CASE("truncated_exp") {
    CHECK(truncated_exp(0, cd{3.7, -2.0}) == cd{1.0, 0.0});
    CHECK(truncated_exp(2, cd{1.0, 0.0}).real() == doctest::Approx(2.5).epsilon(1e-15));
    cd x{3.0, 0.0};
    CHECK(truncated_exp(50, x).real() ==
          doctest::Approx(std::exp(3.0) * regularized_gamma_q(51.0, 3.0)).epsilon(1e-12).scale(0.0));
    // complex argument: compare with direct long double summation
    cd z{3.0, 4.0};
    std::complex<long double> ref = 1.0L, term = 1.0L;
    for (int j = 1; j <= 50; ++j) {
        term *= std::complex<long double>(3.0L, 4.0L) / static_cast<long double>(j);
        ref += term;
    }
    CHECK(std::abs(truncated_exp(50, z) - cd(static_cast<double>(ref.real()), static_cast<double>(ref.imag()))) <
          1e-12 * std::abs(ref));
}

TEST_CASE("truncated_exp identity with Q on [0,50], n <= 200") {
    for (unsigned n : {0u, 1u, 5u, 20u, 80u, 200u}) {
        for (double x = 0.0; x <= 50.0; x += 2.5) {
            double lhs = (truncated_exp(n, cd{x, 0.0}) * std::exp(-x)).real();
            double rhs = regularized_gamma_q(n + 1.0, x);
            CHECK(std::abs(lhs - rhs) < 1e-10);
            double scaled = truncated_exp_scaled(n, cd{x, 0.0}).real();
            CHECK(std::abs(scaled - rhs) < 1e-12);
        }
    }
}

TEST_CASE("truncated_exp_scaled handles large arguments") {
    // Q(401, 400 + 20 i) via the scaled sum must match the unscaled sum times e^{-x} in long double.
    cd x{400.0, 20.0};
    std::complex<long double> xl(400.0L, 20.0L);
    std::complex<long double> term = std::exp(-xl), sum = 0.0L;
    for (int j = 0; j <= 400; ++j) {
        sum += term;
        term *= xl / static_cast<long double>(j + 1);
    }
    cd got = truncated_exp_scaled(400, x);
    CHECK(std::abs(got - cd(static_cast<double>(sum.real()), static_cast<double>(sum.imag()))) < 1e-11);
    CHECK(truncated_exp_scaled(400, cd{400.0, 0.0}).real() ==
          doctest::Approx(regularized_gamma_q(401.0, 400.0)).epsilon(1e-11).scale(0.0));
}

TEST_CASE("erf_real and erfc_real") {
    CHECK(erf_real(0.0) == 0.0);
    CHECK(erfc_real(0.0) == 1.0);
    CHECK(std::abs(erf_real(1.0) - static_cast<double>(erf_taylor_oracle(1.0L).real())) < 1e-7);
    for (double x = -5.0; x <= 5.0; x += 0.1) {
        CHECK(erf_real(-x) == -erf_real(x));
        CHECK(std::abs(erfc_real(x) - (1.0 - erf_real(x))) < 1e-15);
    }
}

TEST_CASE("erf_complex") {
    CHECK(erf_complex(cd{0.0, 0.0}) == cd{0.0, 0.0});
    CHECK(erf_complex(cd{1.0, 0.0}).real() == doctest::Approx(erf_real(1.0)).epsilon(1e-15));
    cd ei = erf_complex(cd{0.0, 1.0});
    auto oracle = erf_taylor_oracle(std::complex<long double>(0.0L, 1.0L));
    CHECK(std::abs(ei.real()) == 0.0);
    CHECK(std::abs(ei.imag() - static_cast<double>(oracle.imag())) < 1e-12);
    CHECK(ei.imag() == doctest::Approx(1.650426).epsilon(1e-6));
    for (double x = -6.0; x <= 6.0; x += 0.05) {
        CHECK(std::abs(erf_complex(cd{x, 0.0}).real() - erf_real(x)) < 1e-12);
        CHECK(std::abs(erfc_complex(cd{x, 0.0}).real() - erfc_real(x)) < 1e-12);
    }
    // moderate complex arguments vs long double Taylor oracle
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int i = 0; i < 200; ++i) {
        cd z{u(rng), u(rng)};
        auto ref = erf_taylor_oracle(std::complex<long double>(z.real(), z.imag()));
        cd r(static_cast<double>(ref.real()), static_cast<double>(ref.imag()));
        CHECK(std::abs(erf_complex(z) - r) < 1e-12 * std::max(1.0, std::abs(r)));
        // conjugate symmetry and oddness
        CHECK(std::abs(erf_complex(std::conj(z)) - std::conj(erf_complex(z))) < 1e-14 * std::max(1.0, std::abs(r)));
        CHECK(std::abs(erf_complex(-z) + erf_complex(z)) < 1e-14 * std::max(1.0, std::abs(r)));
    }
    CHECK_THROWS_AS(erf_complex(cd{12.5, 0.0}), DomainError);
    SeriesControl tight;
    tight.max_terms = 3;
    CHECK_THROWS_AS(erf_complex(cd{2.0, 1.0}, tight), ConvergenceError);
}

TEST_CASE("kummer_1f1 examples") {
    CHECK(kummer_1f1(0.3, 1.7, 0.0) == 1.0);
    for (double x : {-5.0, -1.0, 0.5, 4.0})
        CHECK(kummer_1f1(2.5, 2.5, x) == doctest::Approx(std::exp(x)).epsilon(1e-14));
    // 1F1(1/2;3/2;-t^2) = sqrt(pi) erf(t) / (2t) at t = sqrt(2)
    double t = std::sqrt(2.0);
    double closed = std::sqrt(M_PI) * std::erf(t) / (2.0 * t);
    CHECK(std::abs(kummer_1f1(0.5, 1.5, -2.0) - closed) < 1e-10);
    CHECK_THROWS_AS(kummer_1f1(1.0, -2.0, 1.0), DomainError);
    CHECK_THROWS_AS(kummer_1f1(1.0, 0.0, 1.0), DomainError);
    SeriesControl tight;
    tight.max_terms = 2;
    CHECK_THROWS_AS(kummer_1f1(1.0, 2.0, 5.0, tight), ConvergenceError);
}

TEST_CASE("kummer transform consistency and Boost oracle for |x| <= 8") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(-3.0, 6.0), ub(0.2, 5.0), ux(-8.0, 8.0);
    for (int i = 0; i < 500; ++i) {
        double a = ua(rng), b = ub(rng), x = ux(rng);
        double direct = kummer_1f1_series(a, b, x);
        double transformed = std::exp(x) * kummer_1f1_series(b - a, b, -x);
        CHECK(std::abs(direct - transformed) <= 1e-8 * std::max(1.0, std::abs(direct)));
        double ref = boost::math::hypergeometric_1F1(a, b, x);
        CHECK(std::abs(kummer_1f1(a, b, x) - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
    }
}

// Hermite polynomial H_n(x) by the three-term recurrence, long double.
long double hermite(int n, long double x) {
    long double h0 = 1.0L, h1 = 2.0L * x;
    if (n == 0) return h0;
    for (int k = 1; k < n; ++k) {
        long double h2 = 2.0L * x * h1 - 2.0L * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

TEST_CASE("kummer_1f1 on the edge-gap family stays accurate for large m") {
    // Hermite oracle: 1F1(n+1/2; 1/2; -x^2) = (-1)^n n!/(2n)! H_{2n}(x) e^{-x^2}
    // and 1F1(m+1/2; 3/2; -x^2) = (-1)^{m-1} (m-1)!/(2 (2m-1)! x) H_{2m-1}(x) e^{-x^2}.
    for (int m : {1, 2, 5, 10, 30, 60}) {
        for (double d : {0.5, 1.0, 2.0, 3.0}) {
            long double x = std::sqrt(2.0L) * d;
            long double sign = (m % 2 == 0) ? 1.0L : -1.0L;
            long double ref_half = sign * std::exp(std::lgamma(m + 1.0L) - std::lgamma(2.0L * m + 1.0L)) *
                                   hermite(2 * m, x) * std::exp(-x * x);
            long double ref_three = -sign * std::exp(std::lgamma(1.0L * m) - std::lgamma(2.0L * m)) /
                                    (2.0L * x) * hermite(2 * m - 1, x) * std::exp(-x * x);
            double got_half = kummer_1f1(0.5 + m, 0.5, -2.0 * d * d);
            double got_three = kummer_1f1(0.5 + m, 1.5, -2.0 * d * d);
            CHECK(std::abs(got_half - static_cast<double>(ref_half)) <=
                  1e-10 * std::max(1e-3L, std::abs(ref_half)));
            CHECK(std::abs(got_three - static_cast<double>(ref_three)) <=
                  1e-10 * std::max(1e-3L, std::abs(ref_three)));
        }
    }
    for (int m : {0, 3, 8}) {
        double ref = boost::math::hypergeometric_1F1(0.5 + m, 1.5, -2.0);
        CHECK(kummer_1f1(0.5 + m, 1.5, -2.0) == doctest::Approx(ref).epsilon(1e-12).scale(0.0));
    }
}

TEST_CASE("series terminate well before max_terms at default tolerance") {
    SeriesControl ctl;
    ctl.max_terms = 10000;
    CHECK_NOTHROW(erf_complex(cd{8.0, 8.0}, ctl));
    CHECK_NOTHROW(kummer_1f1(400.5, 1.5, -18.0, ctl));
    CHECK_NOTHROW(kummer_1f1(3.0, 1.5, 200.0, ctl));
}

TEST_CASE("double_factorial") {
    CHECK(double_factorial(-1) == 1.0);
    CHECK(double_factorial(0) == 1.0);
    CHECK(double_factorial(1) == 1.0);
    CHECK(double_factorial(7) == 105.0);
    CHECK(double_factorial(8) == 384.0);
    CHECK_THROWS_AS(double_factorial(-3), DomainError);
}

TEST_CASE("SeriesControl validation") {
    SeriesControl bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad.rel_tol = 1e-10;
    bad.max_terms = 0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}
