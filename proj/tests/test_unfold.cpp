#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "nhrmt/errors.hpp"
#include "nhrmt/unfold.hpp"

using namespace nhrmt;
using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {

// Histogram with counts proportional to a radial probability law, given by its CDF in r.
RadialHistogram synthetic(const std::function<double(double)>& cdf, double scale, std::size_t bins = kDefaultRadialBins,
                          double r_max = kDefaultRadialMax) {
    std::vector<std::uint64_t> c(bins);
    const double w = r_max / bins;
    double prev = cdf(0.0);
    double assigned = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        double next = cdf((b + 1) * w);
        c[b] = static_cast<std::uint64_t>(std::llround((next - prev) * scale));
        assigned += next - prev;
        prev = next;
    }
    auto overflow = static_cast<std::uint64_t>(std::llround((1.0 - assigned) * scale));
    return RadialHistogram::from_counts(std::move(c), r_max, overflow);
}

double uniform_disc_cdf(double r) { return std::min(1.0, r * r); }

// Complex Gaussian with E|z|^2 = v
std::function<double(double)> gaussian_cdf(double v) {
    return [v](double r) { return -std::expm1(-r * r / v); };
}

// Finite-N class A density (1/pi) Q(N, N r^2) integrated in r.
std::function<double(double)> ginibre_cdf(int n) {
    return [n](double r) {
        // d/dr of the cdf is 2 r Q(N, N r^2); closed form r^2 Q(N,Nr^2) + P(N+1,Nr^2)
        const double x = n * r * r;
        return r * r * boost::math::gamma_q(double(n), x) + boost::math::gamma_p(double(n + 1), x);
    };
}

// Direct polar quadrature about z0 of the piecewise-constant planar density.
double disc_quadrature(const RadialHistogram& h, cd z0, double s) {
    auto density = [&](double r) {
        if (r >= h.r_max()) return 0.0;
        auto b = static_cast<std::size_t>(r / h.bin_width());
        return h.planar_density(std::min(b, h.bins() - 1));
    };
    auto inner = [&](double t) {
        auto f = [&](double th) { return density(std::abs(z0 + std::polar(t, th))); };
        return t * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2 * pi, 3, 1e-9);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(inner, 0.0, s, 3, 1e-9);
}

}  // namespace

TEST_CASE("histogram binning and merge") {
    RadialHistogram h(10, 1.0);
    h.add(cd{0.5, 0.0});
    CHECK(h.counts()[5] == 1);
    CHECK(h.total() == 1);
    h.add(cd{0.0, 2.0});
    CHECK(h.overflow() == 1);
    CHECK(h.total() == 2);

    std::mt19937_64 g(3);
    std::normal_distribution<double> n(0.0, 0.5);
    std::vector<cd> p1, p2, all;
    for (int i = 0; i < 500; ++i) p1.emplace_back(n(g), n(g));
    for (int i = 0; i < 700; ++i) p2.emplace_back(n(g), n(g));
    all = p1;
    all.insert(all.end(), p2.begin(), p2.end());
    RadialHistogram a(4096), b(4096), u(4096);
    a.add(p1);
    b.add(p2);
    u.add(all);
    a.merge(b);
    CHECK(a == u);
    RadialHistogram other(2048);
    CHECK_THROWS_AS(a.merge(other), ConfigError);
    std::vector<Spectrum> sp(2);
    sp[0].eigenvalues = p1;
    sp[1].eigenvalues = p2;
    CHECK(build_radial_histogram(sp, 4096) == u);
    CHECK_THROWS_AS(build_radial_histogram(sp, 10), ConfigError);
}

TEST_CASE("constant density gives m(s) = s^2") {
    auto h = synthetic(uniform_disc_cdf, 1e11);
    UnfoldingMap map(h);
    for (cd z0 : {cd{0.0, 0.0}, cd{0.3, 0.1}, cd{-0.5, 0.2}}) {
        for (double s : {1e-3, 0.01, 0.05, 0.1, 0.2}) {
            CHECK(disc_density_integral(h, z0, s) == doctest::Approx(s * s).epsilon(1e-3));
            CHECK(map.integral(z0, s) == doctest::Approx(s * s).epsilon(1e-3));
            CHECK(map.unfold(z0, s) == doctest::Approx(s).epsilon(1e-3));
            CHECK(unfold_distance(h, z0, s) == doctest::Approx(s).epsilon(1e-3));
        }
        CHECK(disc_density_integral(h, z0, 0.0) == 0.0);
        CHECK(map.integral(z0, 0.0) == 0.0);
    }
    CHECK_THROWS_AS(disc_density_integral(h, 0.0, -1.0), DomainError);
}

TEST_CASE("Gaussian density against direct 2D quadrature") {
    auto h = synthetic(gaussian_cdf(0.3), 1e11);
    const cd z0{0.9, 0.0};
    const double s = 0.05;
    const double ref = disc_quadrature(h, z0, s);
    CHECK(disc_density_integral(h, z0, s) == doctest::Approx(ref).epsilon(1e-4).scale(0.0));
    CHECK(UnfoldingMap(h).integral(z0, s) == doctest::Approx(ref).epsilon(1e-4).scale(0.0));
}

TEST_CASE("accelerated integral matches the per-bin sum") {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& h : {synthetic(gaussian_cdf(0.3), 1e11), synthetic(ginibre_cdf(256), 1e10)}) {
        UnfoldingMap map(h);
        double worst = 0.0;
        for (int i = 0; i < 60; ++i) {
            cd z0 = std::polar(1.2 * u(g), 2 * pi * u(g));
            double s = 0.3 * u(g) * u(g);
            double ref = disc_density_integral(h, z0, s);
            double got = map.integral(z0, s);
            if (ref > 0) worst = std::max(worst, std::abs(got - ref) / ref);
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("m(s) is nondecreasing from zero") {
    auto h = synthetic(ginibre_cdf(64), 1e10);
    UnfoldingMap map(h);
    for (cd z0 : {cd{0.0, 0.0}, cd{0.5, 0.0}, cd{0.0, 0.97}, cd{1.1, 0.0}}) {
        double prev_e = 0.0, prev_a = 0.0;
        for (int i = 0; i <= 50; ++i) {
            double s = 0.02 * i;
            double e = disc_density_integral(h, z0, s);
            double a = map.integral(z0, s);
            CHECK(e >= prev_e);
            CHECK(a >= prev_a - 1e-15);
            prev_e = e;
            prev_a = a;
        }
    }
}

TEST_CASE("arc fraction is continuous at the containment threshold") {
    const double rho = 0.2, a = 0.3;
    CHECK(circle_fraction_in_disc(rho, a, rho + a) == 1.0);
    CHECK(circle_fraction_in_disc(rho, a, rho + a - 1e-12) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(circle_fraction_in_disc(rho, a, a - rho) == 0.0);
    CHECK(circle_fraction_in_disc(rho, a, a - rho + 1e-12) == doctest::Approx(0.0).epsilon(1e-5));
    // circle through the disc centre, small s: fraction ~ s / (pi rho)
    CHECK(circle_fraction_in_disc(a, a, 1e-6) == doctest::Approx(1e-6 / (pi * a)).epsilon(1e-6).scale(0.0));
    // a full bin contributes its whole mass once contained
    RadialHistogram h(1000, 1.0);
    h.add(cd{rho + 0.0004, 0.0});
    const double r = h.bin_center(static_cast<std::size_t>((rho + 0.0004) / 0.001));
    CHECK(disc_density_integral(h, a, r + a) == 1.0);
    CHECK(disc_density_integral(h, a, r + a - 1e-13) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("unfolding shrinks distances near the class A edge") {
    const int n = 256;
    auto h = synthetic(ginibre_cdf(n), 1e10);
    UnfoldingMap map(h);
    const cd z_edge{0.0, 1.0 - 0.5 / std::sqrt(double(n))};
    for (double s : {0.02, 0.05, 0.1}) {
        CHECK(map.unfold(z_edge, s) < s);
        CHECK(map.unfold(cd{0.2, 0.0}, s) == doctest::Approx(s).epsilon(2e-3));
    }
}
