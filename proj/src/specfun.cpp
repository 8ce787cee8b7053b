#include "nhrmt/specfun.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ddouble.hpp"
#include "nhrmt/errors.hpp"
#include "numeric_util.hpp"

namespace nhrmt {

using detail::cdd;
using detail::dd;

void SeriesControl::validate() const {
    if (!(rel_tol > 0.0)) throw DomainError("SeriesControl: rel_tol must be positive");
    if (max_terms < 1) throw DomainError("SeriesControl: max_terms must be >= 1");
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kGammaMaxIter = 1000000;

void check_gamma_args(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a))
        throw DomainError("incomplete gamma: shape must be positive, got " + std::to_string(a));
    if (!(x >= 0.0)) throw DomainError("incomplete gamma: x must be nonnegative, got " + std::to_string(x));
}

// log of the common prefactor x^a e^-x / Γ(a)
double log_prefactor(double a, double x) { return a * std::log(x) - x - detail::lgamma_pos(a); }

// P(a,x) = prefactor * sum_k x^k / (a (a+1) ... (a+k)); returns log of the sum.
double log_series_p(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int k = 0; k < kGammaMaxIter; ++k) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) return std::log(sum);
    }
    throw ConvergenceError("incomplete gamma series did not converge");
}

// Q(a,x) = prefactor * CF; modified Lentz. Returns log of the continued fraction.
double log_cf_q(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kGammaMaxIter; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return std::log(h);
    }
    throw ConvergenceError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double log_regularized_gamma_p(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    if (x < a + 1.0) return log_prefactor(a, x) + log_series_p(a, x);
    double q = std::exp(log_prefactor(a, x) + log_cf_q(a, x));
    return std::log1p(-q);
}

double log_regularized_gamma_q(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        double p = std::exp(log_prefactor(a, x) + log_series_p(a, x));
        return std::log1p(-p);
    }
    return log_prefactor(a, x) + log_cf_q(a, x);
}

double regularized_gamma_p(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return std::exp(log_prefactor(a, x) + log_series_p(a, x));
    return 1.0 - std::exp(log_prefactor(a, x) + log_cf_q(a, x));
}

double regularized_gamma_q(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - std::exp(log_prefactor(a, x) + log_series_p(a, x));
    return std::exp(log_prefactor(a, x) + log_cf_q(a, x));
}

double lower_gamma(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    return std::exp(std::log(regularized_gamma_p(a, x)) + detail::lgamma_pos(a));
}

std::complex<double> truncated_exp(unsigned n, std::complex<double> x) {
    detail::NeumaierSum<std::complex<double>> sum;
    std::complex<double> term{1.0, 0.0};
    sum.add(term);
    for (unsigned j = 1; j <= n; ++j) {
        term *= x / static_cast<double>(j);
        sum.add(term);
    }
    return sum.value();
}

std::complex<double> truncated_exp_scaled(unsigned n, std::complex<double> x) {
    if (x == std::complex<double>{0.0, 0.0}) return {1.0, 0.0};
    const std::complex<double> logx = std::log(x);
    detail::NeumaierSum<std::complex<double>> sum;
    for (unsigned j = 0; j <= n; ++j) {
        std::complex<double> lt = static_cast<double>(j) * logx - x - detail::lgamma_pos(j + 1.0);
        sum.add(std::exp(lt));
    }
    return sum.value();
}

double erf_real(double x) { return std::erf(x); }
double erfc_real(double x) { return std::erfc(x); }

namespace {

constexpr double kErfRange = 12.0;
// 2/sqrt(pi) as a double-double
constexpr dd kTwoOverSqrtPi{1.1283791670955126, 1.533545961316588e-17};

// Returns the series sum_k (-1)^k z^{2k+1} / (k! (2k+1)) in double-double.
cdd erf_series(std::complex<double> z, const SeriesControl& ctl) {
    ctl.validate();
    if (std::abs(z) > kErfRange)
        throw DomainError("erf_complex: |z| exceeds the supported range " + std::to_string(kErfRange));
    cdd zz{{z.real(), 0.0}, {z.imag(), 0.0}};
    cdd z2 = zz * zz;
    cdd w{-z2.re, -z2.im};
    cdd power = zz;
    cdd sum = zz;
    const double growth_end = std::norm(z);
    for (int k = 1; k < ctl.max_terms; ++k) {
        power = (power * w) / static_cast<double>(k);
        cdd term = power / static_cast<double>(2 * k + 1);
        sum = sum + term;
        if (k > growth_end && magnitude(term) <= ctl.rel_tol * magnitude(sum)) return sum;
    }
    throw ConvergenceError("erf_complex: series exceeded max_terms");
}

}  // namespace

std::complex<double> erf_complex(std::complex<double> z, const SeriesControl& ctl) {
    if (z == std::complex<double>{0.0, 0.0}) return {0.0, 0.0};
    cdd s = erf_series(z, ctl);
    dd re = s.re * kTwoOverSqrtPi;
    dd im = s.im * kTwoOverSqrtPi;
    return {re.hi + re.lo, im.hi + im.lo};
}

std::complex<double> erfc_complex(std::complex<double> z, const SeriesControl& ctl) {
    if (z == std::complex<double>{0.0, 0.0}) return {1.0, 0.0};
    cdd s = erf_series(z, ctl);
    dd re = dd{1.0, 0.0} - s.re * kTwoOverSqrtPi;
    dd im = -(s.im * kTwoOverSqrtPi);
    return {re.hi + re.lo, im.hi + im.lo};
}

double kummer_1f1_series(double a, double b, double x, const SeriesControl& ctl) {
    ctl.validate();
    if (b <= 0.0 && b == std::floor(b))
        throw DomainError("kummer_1f1: b must not be a nonpositive integer");
    dd sum{1.0, 0.0};
    dd term{1.0, 0.0};
    for (int k = 0; k < ctl.max_terms; ++k) {
        double ratio = (a + k) * x / ((b + k) * (k + 1.0));
        if (ratio == 0.0) return sum.hi + sum.lo;
        term = ((term * (a + k)) * x) / (b + k) / (k + 1.0);
        sum = sum + term;
        // Only stop once the terms are in their decreasing phase.
        if (std::abs(ratio) < 1.0 &&
            std::abs(term.hi) <= ctl.rel_tol * std::abs(sum.hi))
            return sum.hi + sum.lo;
    }
    throw ConvergenceError("kummer_1f1: series exceeded max_terms");
}

double kummer_1f1(double a, double b, double x, const SeriesControl& ctl) {
    if (x >= 0.0) return kummer_1f1_series(a, b, x, ctl);
    return std::exp(x) * kummer_1f1_series(b - a, b, -x, ctl);
}

double double_factorial(int n) {
    if (n < -1) throw DomainError("double_factorial: n must be >= -1");
    long double p = 1.0L;
    for (int k = n; k > 1; k -= 2) p *= k;
    return static_cast<double>(p);
}

}  // namespace nhrmt
