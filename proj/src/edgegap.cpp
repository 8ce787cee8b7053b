#include "nhrmt/edgegap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "nhrmt/errors.hpp"
#include "numeric_util.hpp"

namespace nhrmt {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double sqrt2 = std::numbers::sqrt2;
constexpr int kMaxSeriesTerms = 400;
using cplx = std::complex<double>;
using detail::lgamma_pos;

void check_s(double s) {
    if (!(s >= 0.0 && s <= 3.0)) throw DomainError("edge gap: s must lie in [0, 3], got " + std::to_string(s));
}

// log of binom(2n, n) / 4^n
double log_central_binomial_over_4n(int n) {
    return lgamma_pos(2.0 * n + 1.0) - 2.0 * lgamma_pos(n + 1.0) - 2.0 * n * std::log(2.0);
}

// Sums term(m) for m = 0, 1, ... until two consecutive terms past the peak
// are below rel_tol relative to the sum, or m reaches the cap.
template <class Term>
double sum_series(Term term, double peak, double rel_tol) {
    detail::NeumaierSum<double> sum;
    int small = 0;
    for (int m = 0; m < kMaxSeriesTerms; ++m) {
        const double t = term(m);
        sum.add(t);
        if (m > peak && std::abs(t) <= rel_tol * std::abs(sum.value()))
            ++small;
        else
            small = 0;
        if (small >= 2) break;
    }
    return sum.value();
}

}  // namespace

void EdgeKernelParams::validate() const {
    if (!std::isfinite(d)) throw DomainError("EdgeKernelParams: d must be finite");
    series.validate();
}

cplx conditional_kernel_finite(cplx z, cplx u_bar, cplx z0, int n) {
    if (n < 1) throw DomainError("conditional_kernel_finite: n must be >= 1");
    const unsigned order = static_cast<unsigned>(n);
    const cplx xi1 = z - z0;
    const cplx xi2_bar = u_bar - std::conj(z0);
    const double a0 = std::norm(z0);
    const double q0 = truncated_exp_scaled(order, a0).real();
    if (!(q0 > 1e-300))
        throw DomainError("conditional_kernel_finite: conditioning density vanishes numerically");
    const cplx b1 = a0 + std::conj(z0) * xi1;
    const cplx b2 = a0 + z0 * xi2_bar;
    const cplx a = b1 + z0 * xi2_bar + xi1 * xi2_bar;
    const cplx bracket = std::exp(xi1 * xi2_bar) * q0 * truncated_exp_scaled(order, a) -
                         truncated_exp_scaled(order, b2) * truncated_exp_scaled(order, b1);
    const double gauss = std::exp(-0.5 * (std::norm(xi1) + std::norm(xi2_bar)));
    return gauss / (pi * q0) * bracket;
}

cplx edge_kernel(cplx xi1, cplx xi2_bar, const EdgeKernelParams& p) {
    p.validate();
    const double shift = sqrt2 * p.d;
    const double c0 = erfc_real(shift);
    if (!(c0 > 0.0)) throw DomainError("edge_kernel: erfc(sqrt2 d) underflows");
    const cplx e12 = erfc_complex((xi1 + xi2_bar) / sqrt2 + shift, p.series);
    const cplx e1 = erfc_complex(xi1 / sqrt2 + shift, p.series);
    const cplx e2 = erfc_complex(xi2_bar / sqrt2 + shift, p.series);
    const double gauss = std::exp(-0.5 * (std::norm(xi1) + std::norm(xi2_bar)));
    return gauss / (2.0 * pi) * (std::exp(xi1 * xi2_bar) * e12 - e1 * e2 / c0);
}

double edge_kernel_density(cplx xi, const EdgeKernelParams& p) {
    return edge_kernel(xi, std::conj(xi), p).real();
}

double fredholm_first_term(double s, const EdgeKernelParams& p) {
    p.validate();
    check_s(s);
    if (s == 0.0) return 0.0;
    const double d = p.d;
    const double x = s * s;
    const double c0 = erfc_real(sqrt2 * d);
    const double arg = -2.0 * d * d;
    const double tol = p.series.rel_tol;

    // Angular average of erf(sqrt2 (r cos phi + d)), integrated against r dr.
    double erf_part = 0.0;
    if (d != 0.0) {
        auto term = [&](int m) {
            const double mag = (m + 1.0) * std::log(x) - lgamma_pos(m + 2.0) + m * std::log(2.0) +
                               log_central_binomial_over_4n(m);
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            return sign * std::exp(mag) * kummer_1f1(0.5 + m, 1.5, arg, p.series);
        };
        erf_part = 2.0 * d / std::sqrt(2.0 * pi) * sum_series(term, x, tol);
    }

    // Angular average of erf(r e^{i phi}/sqrt2 + sqrt2 d) erf(conj), against r e^{-r^2} dr.
    auto term = [&](int m) {
        const int n = m / 2;
        const bool odd = m % 2 == 1;
        if (!odd && d == 0.0) return 0.0;
        double w = regularized_gamma_p(m + 1.0, x) * std::exp(log_central_binomial_over_4n(n));
        if (odd)
            w /= 2.0 * n + 1.0;
        else
            w *= 4.0 * d * d;
        const double f = kummer_1f1(0.5 + n, odd ? 0.5 : 1.5, arg, p.series);
        return w * f * f;
    };
    const double product_part = sum_series(term, x, tol) / (pi * c0);

    // 1 - E0 with E0 = 1 - x/2 - (e^{-x} - 1)(1 - 1/(2 erfc)) + erf_part + product_part
    return x / 2.0 + std::expm1(-x) * (1.0 - 1.0 / (2.0 * c0)) - erf_part - product_part;
}

double gap_first_order(double s, const EdgeKernelParams& p) { return 1.0 - fredholm_first_term(s, p); }

double gap_first_order_d0(double s, const SeriesControl& ctl) {
    ctl.validate();
    check_s(s);
    if (s == 0.0) return 1.0;
    const double x = s * s;
    auto term = [&](int n) {
        const double lw = lgamma_pos(2.0 * n + 2.0) - 2.0 * (n * std::log(2.0) + lgamma_pos(n + 1.0) + std::log(2.0 * n + 1.0));
        return regularized_gamma_p(2.0 * n + 2.0, x) * std::exp(lw);
    };
    const double series = sum_series(term, x / 2.0, ctl.rel_tol);
    return 1.0 - (x + std::expm1(-x)) / 2.0 + series / pi;
}

std::optional<double> first_order_breakdown(const EdgeKernelParams& p) {
    // E0 = 1 - I1 with I1 increasing from 0, so only the lower bound can fail.
    if (gap_first_order(3.0, p) >= 0.0) return std::nullopt;
    double lo = 0.0, hi = 3.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (gap_first_order(mid, p) < 0.0 ? hi : lo) = mid;
    }
    return hi;
}

double gap_small_s_coefficient(double d) {
    if (!std::isfinite(d)) throw DomainError("gap_small_s_coefficient: d must be finite");
    const double c0 = erfc_real(sqrt2 * d);
    return c0 / 4.0 - std::exp(-4.0 * d * d) / (2.0 * pi * c0) + d / std::sqrt(2.0 * pi) * std::exp(-2.0 * d * d);
}

double bulk_gap_small_s_coefficient(int n) {
    if (n < 2) throw DomainError("bulk_gap_small_s_coefficient: n must be >= 2");
    // Coefficients of 1, x, x^2 in Q(k+1, x) = e^{-x} e_k(x) and in the product.
    std::array<double, 3> prod{1.0, 0.0, 0.0};
    constexpr std::array<double, 3> exp_neg{1.0, -1.0, 0.5};
    for (int k = 1; k <= n - 1; ++k) {
        std::array<double, 3> ek{1.0, k >= 1 ? 1.0 : 0.0, k >= 2 ? 0.5 : 0.0};
        std::array<double, 3> q{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; i + j < 3; ++j) q[i + j] += exp_neg[i] * ek[j];
        std::array<double, 3> next{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; i + j < 3; ++j) next[i + j] += prod[i] * q[j];
        prod = next;
    }
    return -prod[2];
}

}  // namespace nhrmt
