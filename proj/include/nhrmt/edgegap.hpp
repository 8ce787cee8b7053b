#pragma once

#include <complex>
#include <optional>

#include "nhrmt/specfun.hpp"

namespace nhrmt {

// Conditioning eigenvalue at z0 = sqrt(N) + d on the real axis; d > 0 lies
// outside the limiting support.
struct EdgeKernelParams {
    double d = 0.0;
    SeriesControl series{};

    void validate() const;
};

// GinUE kernel of order N conditioned on an eigenvalue at z0, with cocycles
// dropped: exp(-(|xi1|^2+|xi2|^2)/2) / (pi Q(N+1,|z0|^2)) *
// [e^{xi1 conj(xi2)} Q(N+1,|z0|^2) Q(N+1,a) - Q(N+1,b2) Q(N+1,b1)],
// with xi1 = z - z0, conj(xi2) = u_bar - conj(z0) and Q continued to complex
// arguments as e^{-w} e_N(w).
std::complex<double> conditional_kernel_finite(std::complex<double> z, std::complex<double> u_bar,
                                               std::complex<double> z0, int n);

// Large-N limit of the conditional kernel at the edge, in the local variables.
std::complex<double> edge_kernel(std::complex<double> xi1, std::complex<double> xi2_bar,
                                 const EdgeKernelParams& p);
// Diagonal K(xi, conj(xi)), real and nonnegative.
double edge_kernel_density(std::complex<double> xi, const EdgeKernelParams& p);

// I1(s): the l=1 Fredholm term, computed without the leading 1 so that it
// keeps relative accuracy at small s.
double fredholm_first_term(double s, const EdgeKernelParams& p);
// First-order Fredholm truncation 1 - I1(s) of the edge gap probability,
// from the double series in 1F1 and lower incomplete gammas. s in [0, 3].
double gap_first_order(double s, const EdgeKernelParams& p);
// The same truncation at d = 0 from its simplified single series.
double gap_first_order_d0(double s, const SeriesControl& ctl = {});

// Smallest s in [0, 3] at which the first-order truncation leaves [0, 1],
// located to 1e-10; empty if it stays a probability on the whole range.
std::optional<double> first_order_breakdown(const EdgeKernelParams& p);

// c(d) in E0(s) = 1 - c(d) s^4 + O(s^6) at the edge.
double gap_small_s_coefficient(double d);
// s^4 coefficient of the bulk conditional gap prod_{k=1}^{N-1} Q(k+1, s^2),
// by truncated power-series multiplication.
double bulk_gap_small_s_coefficient(int n);

}  // namespace nhrmt
