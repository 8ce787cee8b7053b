#pragma once

#include <complex>

namespace nhrmt {

struct SeriesControl {
    double rel_tol = 1e-14;
    int max_terms = 10000;

    void validate() const;
};

// Regularized upper incomplete gamma Q(a,x) = Γ(a,x)/Γ(a).
double regularized_gamma_q(double a, double x);
// Regularized lower incomplete gamma P(a,x) = 1 - Q(a,x), accurate when small.
double regularized_gamma_p(double a, double x);
// log P(a,x) and log Q(a,x); finite where P or Q underflow.
double log_regularized_gamma_p(double a, double x);
double log_regularized_gamma_q(double a, double x);
// Unregularized lower incomplete gamma γ(a,x).
double lower_gamma(double a, double x);

// e_n(x) = sum_{j=0}^n x^j / j!
std::complex<double> truncated_exp(unsigned n, std::complex<double> x);
// exp(-x) e_n(x); equals Q(n+1, x) for real x >= 0. Stable for |x| up to
// several hundred, where e_n(x) itself would overflow.
std::complex<double> truncated_exp_scaled(unsigned n, std::complex<double> x);

double erf_real(double x);
double erfc_real(double x);

// Taylor series of erf, summed in double-double arithmetic. |z| <= 12.
std::complex<double> erf_complex(std::complex<double> z, const SeriesControl& ctl = {});
std::complex<double> erfc_complex(std::complex<double> z, const SeriesControl& ctl = {});

// Confluent hypergeometric 1F1(a;b;x). Negative x goes through the Kummer
// transform 1F1(a;b;x) = e^x 1F1(b-a;b;-x).
double kummer_1f1(double a, double b, double x, const SeriesControl& ctl = {});
// The raw power series without any transform.
double kummer_1f1_series(double a, double b, double x, const SeriesControl& ctl = {});

// n!! with (-1)!! = 0!! = 1.
double double_factorial(int n);

}  // namespace nhrmt
