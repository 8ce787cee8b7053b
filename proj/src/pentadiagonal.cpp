#include "nhrmt/pentadiagonal.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "nhrmt/errors.hpp"
#include "nhrmt/quadrature.hpp"
#include "nhrmt/specfun.hpp"
#include "numeric_util.hpp"

namespace nhrmt {

namespace {
constexpr double pi = std::numbers::pi;
using cd = std::complex<double>;

double gaussian_log_moment(int q, double t) {
    return log_regularized_gamma_q(q, t * t) + detail::lgamma_pos(q) - std::numbers::ln2;
}
}  // namespace

void PentadiagonalSpec::validate() const {
    if (n < 3) throw DomainError("PentadiagonalSpec: n must be >= 3");
    if (!(quad_tol > 0.0)) throw DomainError("PentadiagonalSpec: quad_tol must be positive");
    if (!(t_max > 0.0)) throw DomainError("PentadiagonalSpec: t_max must be positive");
    if (!log_moment || !log_weight) throw DomainError("PentadiagonalSpec: moment and weight functions required");
}

PentadiagonalSpec PentadiagonalSpec::gaussian(int n, double quad_tol) {
    PentadiagonalSpec s;
    s.n = n;
    s.quad_tol = quad_tol;
    s.log_moment = gaussian_log_moment;
    s.log_weight = [](double r) { return -r * r; };
    s.gaussian_ = true;
    return s;
}

Eigen::MatrixXcd matrix_a(cd z, cd z3, int n) {
    if (n < 3) throw DomainError("matrix_a: n must be >= 3");
    const int m = n - 3;
    const double a3 = std::norm(z3);
    cd mm[4][4];
    mm[1][1] = a3 * a3 * std::norm(z);
    mm[1][2] = -z3 * a3 * (std::norm(z) + z);
    mm[1][3] = z3 * z3 * z;
    mm[2][2] = a3 * std::norm(1.0 + z);
    mm[2][3] = -z3 * (1.0 + z);
    mm[3][3] = 1.0;
    for (int l = 1; l <= 3; ++l)
        for (int k = 1; k < l; ++k) mm[l][k] = std::conj(mm[k][l]);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, m);
    const double t = std::abs(z3);
    for (int j = 1; j <= m; ++j)
        for (int k = 1; k <= m; ++k)
            for (int l = 1; l <= 3; ++l)
                for (int mi = 1; mi <= 3; ++mi)
                    if (l + j == mi + k) a(j - 1, k - 1) += 2.0 * pi * mm[l][mi] * std::exp(gaussian_log_moment(j + l, t));
    return a;
}

namespace {

// |w|^2 |w - a|^2 |w - b|^2 = |p1 w + p2 w^2 + p3 w^3|^2 with a = t z, b = t.
std::array<cd, 4> poly_coeffs(cd z, double t) { return {cd{0.0}, t * t * z, -t * (1.0 + z), cd{1.0}}; }

// Entries 2 pi sum_q mu_q p_{q-j} conj(p_{q-k}) divided by 2 pi sqrt(mu_{j+3}(0) mu_{k+3}(0)).
// Returns the band rows: band[d][j] = entry (j+d, j), d = 0,1,2.
std::array<std::vector<cd>, 3> scaled_band(cd z, double t, const PentadiagonalSpec& spec) {
    const int m = spec.n - 3;
    const auto p = poly_coeffs(z, t);
    std::vector<double> lmu(m + 4), lmu0(m + 4);
    for (int q = 2; q <= m + 3; ++q) {
        lmu[q] = spec.log_moment(q, t);
        lmu0[q] = spec.log_moment(q, 0.0);
    }
    std::array<std::vector<cd>, 3> band;
    for (int d = 0; d < 3; ++d) band[d].assign(m, cd{0.0});
    for (int k = 1; k <= m; ++k)
        for (int d = 0; d < 3 && k + d <= m; ++d) {
            const int j = k + d;
            cd sum{0.0};
            for (int q = j + 1; q <= k + 3; ++q)
                sum += std::exp(lmu[q] - 0.5 * (lmu0[j + 3] + lmu0[k + 3])) * p[q - j] * std::conj(p[q - k]);
            band[d][k - 1] = sum;
        }
    return band;
}

double scale_log_offset(const PentadiagonalSpec& spec) {
    double s = 0.0;
    for (int j = 1; j <= spec.n - 3; ++j) s += std::log(2.0 * pi) + spec.log_moment(j + 3, 0.0);
    return s;
}

// log det of the scaled matrix by banded Cholesky (bandwidth 2).
double scaled_log_det(cd z, double t, const PentadiagonalSpec& spec) {
    const int m = spec.n - 3;
    if (m == 0) return 0.0;
    auto b = scaled_band(z, t, spec);
    // l[d][k]: L(k+d, k)
    std::array<std::vector<cd>, 3> l;
    for (auto& v : l) v.assign(m, cd{0.0});
    double log_det = 0.0;
    for (int k = 0; k < m; ++k) {
        double diag = b[0][k].real();
        if (k >= 1) diag -= std::norm(l[1][k - 1]);
        if (k >= 2) diag -= std::norm(l[2][k - 2]);
        if (!(diag > 0.0)) throw ConvergenceError("pentadiagonal determinant: matrix not positive definite");
        const double lkk = std::sqrt(diag);
        l[0][k] = lkk;
        log_det += 2.0 * std::log(lkk);
        // L(k+1,k) = (A(k+1,k) - L(k+1,k-1) conj(L(k,k-1))) / L(k,k)
        if (k + 1 < m) {
            cd v = b[1][k];
            if (k >= 1) v -= l[2][k - 1] * std::conj(l[1][k - 1]);
            l[1][k] = v / lkk;
        }
        if (k + 2 < m) l[2][k] = b[2][k] / lkk;
    }
    return log_det;
}

}  // namespace

Eigen::MatrixXcd matrix_a_tilde(cd z, double t, const PentadiagonalSpec& spec) {
    spec.validate();
    const int m = spec.n - 3;
    const auto p = poly_coeffs(z, t);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, m);
    for (int j = 1; j <= m; ++j)
        for (int k = 1; k <= m; ++k)
            for (int q = std::max(j, k) + 1; q <= std::min(j, k) + 3; ++q)
                a(j - 1, k - 1) += 2.0 * pi * std::exp(spec.log_moment(q, t)) * p[q - j] * std::conj(p[q - k]);
    return a;
}

double log_det_a_tilde(cd z, double t, const PentadiagonalSpec& spec) {
    spec.validate();
    return scaled_log_det(z, t, spec) + scale_log_offset(spec);
}

ConditionalRatio::ConditionalRatio(const PentadiagonalSpec& spec) : spec_(spec) {
    spec_.validate();
    // mirror symmetric in y, so integrate theta over [0, pi] and double
    const QuadOptions opt{std::max(spec_.quad_tol, 1e-12)};
    auto radial = [&](double r) {
        auto f = [&](double th) { return unnormalized(r * std::cos(th), r * std::sin(th)); };
        return r * 2.0 * integrate(f, 0.0, pi, opt);
    };
    norm_ = integrate_pieces(radial, {0.0, 0.5, 1.0}, opt);
    if (!(norm_ > 0.0) || !std::isfinite(norm_)) throw ConvergenceError("ConditionalRatio: normalization failed");
}

double ConditionalRatio::unnormalized(double x, double y) const {
    const cd z{x, y};
    const double r2 = std::norm(z);
    if (r2 > 1.0) return 0.0;
    const double pref = r2 * std::norm(1.0 - z);
    if (pref == 0.0) return 0.0;
    const double rz = std::sqrt(r2);
    auto f = [&](double t) {
        if (t == 0.0) return 0.0;
        const double lg = 9.0 * std::log(t) + spec_.log_weight(t * rz) + spec_.log_weight(t) + scaled_log_det(z, t, spec_);
        return std::exp(lg);
    };
    return pref * integrate_pieces(f, {0.0, 1.0, 2.0, 4.0, spec_.t_max}, {spec_.quad_tol, 1e-300});
}

double ConditionalRatio::operator()(double x, double y) const { return unnormalized(x, y) / norm_; }

double finite_n_conditional_ratio(double x, double y, const PentadiagonalSpec& spec) {
    if (!spec.is_gaussian()) return ConditionalRatio(spec)(x, y);
    static std::mutex mu;
    static std::map<std::tuple<int, double, double>, std::shared_ptr<const ConditionalRatio>> cache;
    std::shared_ptr<const ConditionalRatio> ratio;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[{spec.n, spec.quad_tol, spec.t_max}];
        if (!slot) slot = std::make_shared<const ConditionalRatio>(spec);
        ratio = slot;
    }
    return (*ratio)(x, y);
}

}  // namespace nhrmt
