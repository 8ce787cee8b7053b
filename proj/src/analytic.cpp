#include "nhrmt/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nhrmt/errors.hpp"
#include "nhrmt/quadrature.hpp"
#include "nhrmt/specfun.hpp"
#include "numeric_util.hpp"

namespace nhrmt {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double sqrt3 = std::numbers::sqrt3;
using detail::lgamma_pos;
}  // namespace

double density_ginue(double r, int n) {
    if (!(r >= 0.0)) throw DomainError("density_ginue: r must be nonnegative");
    if (n < 1) throw DomainError("density_ginue: n must be >= 1");
    return regularized_gamma_q(n, n * r * r) / pi;
}

double density_ai_dag(double r, int n) {
    if (!(r > 0.0)) throw DomainError("density_ai_dag: r must be positive");
    if (n < 2) throw DomainError("density_ai_dag: n must be >= 2");
    // The bracket split into four terms, each divided by Gamma(N+2) and
    // assembled in logs with regularized incomplete gammas.
    const double dn = n;
    const double x = dn * r * r;
    const double lx = std::log(x);
    const double lg_n2 = lgamma_pos(dn + 2.0);
    const double a = 0.5 * (dn + 3.0);
    const double log_p = log_regularized_gamma_p(a, 0.5 * x) + lgamma_pos(a) + 0.5 * dn * std::numbers::ln2;
    const double log_q = log_regularized_gamma_q(dn, x) + lgamma_pos(dn);
    const double root = std::sqrt(0.5 * x);

    const double t1 = root * std::exp(dn * lx - x - lg_n2);
    const double t2 = root * (dn - 0.5 * x) * std::exp(log_q - lg_n2);
    const double t3 = std::exp(log_p + 0.5 * dn * lx - 0.5 * x - lg_n2);
    const double t4 = 0.5 * (dn - 1.0 - x) * std::exp(log_p + log_q - 0.5 * dn * lx + 0.5 * x - lg_n2);
    const double value = std::sqrt(2.0 * dn) / (pi * r) * (t1 + t2 + t3 + t4);
    if (!std::isfinite(value)) throw DomainError("density_ai_dag: value out of representable range");
    return value;
}

namespace {

struct GapTerms {
    double log_gap = 0.0;       // log prod Q(k+1, s^2)
    std::vector<double> w;      // 2 s pmf_k / Q_k
    std::vector<double> ratio;  // P_k / Q_k
    bool zero = false;
};

GapTerms gap_terms(double s, int n, bool need_ratio) {
    if (!(s >= 0.0)) throw DomainError("ginibre spacing: s must be nonnegative");
    if (n < 2) throw DomainError("ginibre spacing: n must be >= 2");
    GapTerms g;
    const double x = s * s;
    for (int k = 1; k <= n - 1; ++k) {
        const double lq = log_regularized_gamma_q(k + 1.0, x);
        if (!std::isfinite(lq)) {
            g.zero = true;
            return g;
        }
        g.log_gap += lq;
        const double lpmf = x > 0.0 ? k * std::log(x) - x - lgamma_pos(k + 1.0) : -INFINITY;
        g.w.push_back(2.0 * s * std::exp(lpmf - lq));
        if (need_ratio) g.ratio.push_back(std::expm1(-lq));  // (1-Q)/Q
    }
    return g;
}

}  // namespace

double ginibre_gap(double s, int n) {
    auto g = gap_terms(s, n, false);
    return g.zero ? 0.0 : std::exp(g.log_gap);
}

double ginibre_nn(double s, int n) {
    auto g = gap_terms(s, n, false);
    if (g.zero) return 0.0;
    detail::NeumaierSum<double> sum;
    for (double w : g.w) sum.add(w);
    return std::exp(g.log_gap) * sum.value();
}

double ginibre_nnn(double s, int n) {
    auto g = gap_terms(s, n, true);
    if (g.zero) return 0.0;
    detail::NeumaierSum<double> sr, sw, diag;
    for (std::size_t k = 0; k < g.w.size(); ++k) {
        sr.add(g.ratio[k]);
        sw.add(g.w[k]);
        diag.add(g.ratio[k] * g.w[k]);
    }
    return std::exp(g.log_gap) * (sr.value() * sw.value() - diag.value());
}

double ginibre_rescale_constant(int n) {
    auto f = [n](double s) { return s * ginibre_nn(s, n); };
    const double hi = 4.0 + std::sqrt(static_cast<double>(n));
    return integrate_pieces(f, {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, hi, hi + 10.0}, {1e-12});
}

double ginibre_nn_rescaled(double s, int n, double c) { return c * ginibre_nn(c * s, n); }
double ginibre_nnn_rescaled(double s, int n, double c) { return c * ginibre_nnn(c * s, n); }

double poisson_nn(double s) {
    if (!(s >= 0.0)) throw DomainError("poisson_nn: s must be nonnegative");
    return 0.5 * pi * s * std::exp(-0.25 * pi * s * s);
}

double poisson_nnn(double s) {
    if (!(s >= 0.0)) throw DomainError("poisson_nnn: s must be nonnegative");
    return pi * pi / 8.0 * s * s * s * std::exp(-0.25 * pi * s * s);
}

double poisson_nn_cdf(double s) { return s <= 0.0 ? 0.0 : -std::expm1(-0.25 * pi * s * s); }

void SurmiseParams::validate() const {
    if (!(tau >= 0.0 && tau < 1.0)) throw DomainError("SurmiseParams: tau must lie in [0,1)");
}

GaussianCoefficients surmise_coefficients(double x, double y, const SurmiseParams& p) {
    p.validate();
    const double t = p.tau, u = 1.0 / (1.0 - t * t);
    if (p.variant == SurmiseVariant::CONDITIONAL) {
        const double g = x * x + y * y + 1.0, h = x * x - y * y + 1.0;
        return {u * (g + t * h), u * (g - t * h), -2.0 * t * u * x * y};
    }
    const double g = x * x + y * y - x + 1.0, h = x * x - y * y - x + 1.0;
    const double c = 2.0 / 3.0 * u;
    return {c * (g + t * h), c * (g - t * h), t * c * y * (1.0 - 2.0 * x)};
}

double surmise_normalization(const SurmiseParams& p) {
    p.validate();
    const double t2 = p.tau * p.tau;
    return p.variant == SurmiseVariant::CONDITIONAL ? pi * pi * (1.0 - t2) * (2.0 + t2) : 18.0 * pi * pi * (1.0 - t2);
}

namespace {

// r2 is passed separately so polar callers on the unit circle stay inside.
double surmise_core(double x, double y, double r2, const SurmiseParams& p) {
    if (r2 > 1.0) return 0.0;
    const double t2 = p.tau * p.tau, e = 1.0 - t2;
    const double e5 = e * e * e * e * e;
    const double k = surmise_normalization(p);
    const bool cond = p.variant == SurmiseVariant::CONDITIONAL;
    const double g = cond ? r2 + 1.0 : r2 + 1.0 - x;
    const double c = cond ? 4.0 : 3.0;  // weight of y^2
    const double h = g * g - c * y * y;
    const double den = std::pow(e * g * g + c * t2 * y * y, 4.5);
    const double poly = 8.0 * g * g * g * g + 24.0 * t2 * g * g * h + 3.0 * t2 * t2 * h * h;
    const double pre = cond ? 3.0 * pi * e5 / k : 729.0 * pi * e5 / (32.0 * k);
    const double num = cond ? r2 * (g - 2.0 * x) : r2 * (g - x);
    return pre * num * poly / den;
}

double surmise_polar(double r, double theta, const SurmiseParams& p) {
    return surmise_core(r * std::cos(theta), r * std::sin(theta), r * r, p);
}

}  // namespace

double surmise_eginue(double x, double y, const SurmiseParams& p) {
    p.validate();
    return surmise_core(x, y, x * x + y * y, p);
}

namespace {

// Breakpoints clustering around `centre` at multiples of `w`, clipped to [lo, hi].
std::vector<double> clustered(double lo, double hi, std::initializer_list<double> centres, double w) {
    std::vector<double> pts{lo, hi};
    for (double c : centres)
        for (double m : {0.0, 1.0, 4.0, 16.0, 64.0})
            for (double sgn : {-1.0, 1.0}) {
                const double v = c + sgn * m * w;
                if (v > lo && v < hi) pts.push_back(v);
            }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double width_scale(const SurmiseParams& p) { return std::max(1e-6, std::sqrt(1.0 - p.tau * p.tau)); }

}  // namespace

double surmise_radial_marginal(double r, const SurmiseParams& p, double rel_tol) {
    p.validate();
    if (r <= 0.0 || r > 1.0) return 0.0;
    auto f = [&](double th) { return r * surmise_polar(r, th, p); };
    // even in theta: mass sits near theta = 0 and pi when tau -> 1
    const double w = std::min(0.5, width_scale(p) / r);
    return 2.0 * integrate_pieces(f, clustered(0.0, pi, {0.0, pi}, w), {rel_tol, 1e-300});
}

double surmise_angular_marginal(double theta, const SurmiseParams& p, double rel_tol) {
    p.validate();
    auto f = [&](double r) { return r * surmise_polar(r, theta, p); };
    const double sn = std::abs(std::sin(theta));
    const double w = sn > 0.0 ? std::min(0.25, width_scale(p) / sn) : 0.25;
    return integrate_pieces(f, clustered(0.0, 1.0, {0.0}, w), {rel_tol, 1e-300});
}

Curve surmise_marginals(const SurmiseParams& p, Marginal which, int points, double rel_tol) {
    p.validate();
    if (points < 2) throw DomainError("surmise_marginals: need at least 2 grid points");
    Curve c;
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        if (which == Marginal::RADIAL) {
            c.x.push_back(t);
            c.y.push_back(surmise_radial_marginal(t, p, rel_tol));
        } else {
            const double th = -pi + 2.0 * pi * t;
            c.x.push_back(th);
            c.y.push_back(surmise_angular_marginal(th, p, rel_tol));
        }
    }
    return c;
}

double gue_surmise(double x, GueSurmise which) {
    switch (which) {
        case GueSurmise::CONSECUTIVE: {
            if (x < 0.0) return 0.0;
            const double d = 1.0 + x + x * x;
            return 81.0 * sqrt3 / (4.0 * pi) * x * x * (1.0 + x) * (1.0 + x) / (d * d * d * d);
        }
        case GueSurmise::NN: {
            if (x * x > 1.0) return 0.0;
            const double d = 1.0 - x + x * x;
            return 27.0 * sqrt3 / (2.0 * pi) * x * x * (1.0 - x) * (1.0 - x) / (d * d * d * d);
        }
        case GueSurmise::CONDITIONAL_NN: {
            if (x * x > 1.0) return 0.0;
            const double d = 1.0 + x * x;
            return 16.0 / pi * x * x * (1.0 - x) * (1.0 - x) / (d * d * d * d);
        }
    }
    return 0.0;
}

double hermitian_limit_marginal(double x, SurmiseVariant variant) {
    return gue_surmise(x, variant == SurmiseVariant::CONDITIONAL ? GueSurmise::CONDITIONAL_NN : GueSurmise::NN);
}

double surmise_real_marginal(double x, const SurmiseParams& p, double rel_tol) {
    p.validate();
    if (x * x >= 1.0) return 0.0;
    const double ymax = std::sqrt(1.0 - x * x);
    auto f = [&](double y) { return surmise_eginue(x, y, p); };
    // even in y
    return 2.0 * integrate_pieces(f, clustered(0.0, ymax, {0.0}, width_scale(p)), {rel_tol, 1e-300});
}

double surmise_limit_consistency(double tau_near_1, SurmiseVariant variant, int grid) {
    if (!(tau_near_1 >= 0.99 && tau_near_1 < 1.0))
        throw DomainError("surmise_limit_consistency: tau must lie in [0.99, 1)");
    if (grid < 1) throw DomainError("surmise_limit_consistency: grid must be positive");
    const SurmiseParams p{tau_near_1, variant};
    double worst = 0.0;
    // cell centres: the limit is pointwise on the open interval (-1, 1)
    for (int i = 0; i < grid; ++i) {
        const double x = -1.0 + (i + 0.5) * 2.0 / grid;
        worst = std::max(worst, std::abs(surmise_real_marginal(x, p) - hermitian_limit_marginal(x, variant)));
    }
    return worst;
}

}  // namespace nhrmt
