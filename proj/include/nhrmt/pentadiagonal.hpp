#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace nhrmt {

// Conditional spacing ratio of class A at finite N for a rotationally
// invariant weight w(r), through the pentadiagonal (N-3)x(N-3) matrix of
// radial moments.
struct PentadiagonalSpec {
    int n = 3;
    double quad_tol = 1e-10;  // relative tolerance of the |z3| integral
    double t_max = 10.0;      // upper limit of the |z3| integral
    // log of \int_t^\infty r^{2q-1} w(r) dr
    std::function<double(int q, double t)> log_moment;
    // log w(r)
    std::function<double(double r)> log_weight;

    void validate() const;
    bool is_gaussian() const { return gaussian_; }
    // w(r) = exp(-r^2): moments Gamma(q, t^2)/2
    static PentadiagonalSpec gaussian(int n, double quad_tol = 1e-10);

private:
    bool gaussian_ = false;
};

// A_jk for complex z3 straight from the expansion coefficients M_lm, Gaussian weight.
Eigen::MatrixXcd matrix_a(std::complex<double> z, std::complex<double> z3, int n);
// The phase-free matrix at |z3| = t, dense and unscaled.
Eigen::MatrixXcd matrix_a_tilde(std::complex<double> z, double t, const PentadiagonalSpec& spec);
// log det of matrix_a_tilde by banded Cholesky on a rescaled copy.
double log_det_a_tilde(std::complex<double> z, double t, const PentadiagonalSpec& spec);

class ConditionalRatio {
public:
    explicit ConditionalRatio(const PentadiagonalSpec& spec);
    // Normalized density on the unit disc; zero outside.
    double operator()(double x, double y) const;
    // Before normalization, with a fixed z-independent log offset removed from the determinant.
    double unnormalized(double x, double y) const;
    double normalization() const { return norm_; }

private:
    PentadiagonalSpec spec_;
    double log_offset_ = 0.0;
    double norm_ = 1.0;
};

// Uses a cached ConditionalRatio for Gaussian specs.
double finite_n_conditional_ratio(double x, double y, const PentadiagonalSpec& spec);

}  // namespace nhrmt
