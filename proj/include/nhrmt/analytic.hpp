#pragma once

#include <vector>

namespace nhrmt {

// Finite-N radial densities on the unit-disc scale, normalized so that
// 2 pi \int r R(r) dr = 1.
double density_ginue(double r, int n);    // Gamma(N, N r^2) / (pi Gamma(N))
double density_ai_dag(double r, int n);   // class AI-dagger, r > 0, n >= 2

// Nearest and next-nearest neighbour spacing densities around a point
// conditioned to the origin, class A with n eigenvalues.
double ginibre_nn(double s, int n);
double ginibre_nnn(double s, int n);
// Gap probability prod_{k=1}^{n-1} Q(k+1, s^2).
double ginibre_gap(double s, int n);
// First moment of ginibre_nn; rescaled curves are c p(c s).
double ginibre_rescale_constant(int n);
double ginibre_nn_rescaled(double s, int n, double c);
double ginibre_nnn_rescaled(double s, int n, double c);

double poisson_nn(double s);    // (pi/2) s exp(-pi s^2/4)
double poisson_nnn(double s);   // (pi^2/8) s^3 exp(-pi s^2/4)
double poisson_nn_cdf(double s);

enum class SurmiseVariant { CONDITIONAL, UNCONDITIONAL };

struct SurmiseParams {
    double tau = 0.0;
    SurmiseVariant variant = SurmiseVariant::CONDITIONAL;
    void validate() const;  // tau in [0,1)
};

// Coefficients of the Gaussian exponent -t^2 A_+ + 2 t s B - s^2 A_- of the
// N = 3 integral.
struct GaussianCoefficients {
    double a_plus, a_minus, b;
};
GaussianCoefficients surmise_coefficients(double x, double y, const SurmiseParams& p);
// Normalization K_C(tau) = pi^2 (1-tau^2)(2+tau^2) or K(tau) = 18 pi^2 (1-tau^2).
double surmise_normalization(const SurmiseParams& p);
// N = 3 eGinUE ratio density at z = x + iy; zero outside the unit disc.
double surmise_eginue(double x, double y, const SurmiseParams& p);

enum class Marginal { RADIAL, ANGULAR };
struct Curve {
    std::vector<double> x, y;
};
// Radial marginal on r in [0,1] (includes the factor r) or angular on theta in
// (-pi, pi], tabulated at `points` uniform grid nodes.
Curve surmise_marginals(const SurmiseParams& p, Marginal which, int points = 201, double rel_tol = 1e-9);
double surmise_radial_marginal(double r, const SurmiseParams& p, double rel_tol = 1e-9);
double surmise_angular_marginal(double theta, const SurmiseParams& p, double rel_tol = 1e-9);

enum class GueSurmise { CONSECUTIVE, NN, CONDITIONAL_NN };
double gue_surmise(double x, GueSurmise which);

// tau -> 1 limits of the real-part marginal: f_C (conditional) and f.
double hermitian_limit_marginal(double x, SurmiseVariant variant);
// \int dy of the surmise at fixed x.
double surmise_real_marginal(double x, const SurmiseParams& p, double rel_tol = 1e-10);
// sup over a grid in x of |surmise_real_marginal - hermitian_limit_marginal|.
double surmise_limit_consistency(double tau_near_1, SurmiseVariant variant, int grid = 41);

}  // namespace nhrmt
