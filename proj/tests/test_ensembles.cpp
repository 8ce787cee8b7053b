#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nhrmt/eigensolve.hpp"
#include "nhrmt/ensembles.hpp"
#include "nhrmt/errors.hpp"

using namespace nhrmt;
using cd = std::complex<double>;

namespace {

EnsembleSpec make(EnsembleClass c, int n, std::uint64_t seed = 17, std::uint64_t idx = 0) {
    EnsembleSpec s;
    s.cls = c;
    s.n = n;
    s.seed = seed;
    s.sample_index = idx;
    return s;
}

}  // namespace

TEST_CASE("spec validation") {
    auto s = make(EnsembleClass::EGINUE, 32);
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.tau = 1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.tau = 0.3;
    CHECK_NOTHROW(s.validate());
    auto a = make(EnsembleClass::A, 1);
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a.n = 4;
    a.tau = 0.1;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    CHECK_THROWS_AS(sample_matrix(make(EnsembleClass::POISSON_GAUSS, 8)), ConfigError);
    CHECK_THROWS_AS(sample_poisson(make(EnsembleClass::A, 8)), ConfigError);
    CHECK(parse_ensemble("aii") == EnsembleClass::AII_DAG);
    CHECK_THROWS_AS(parse_ensemble("goe"), ConfigError);
}

TEST_CASE("AI_DAG is exactly symmetric") {
    auto j = sample_matrix(make(EnsembleClass::AI_DAG, 4));
    CHECK((j - j.transpose()).cwiseAbs().maxCoeff() == 0.0);
    auto big = sample_matrix(make(EnsembleClass::AI_DAG, 200));
    CHECK((big - big.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("AII_DAG is exactly self-dual") {
    for (int n : {3, 17}) {
        auto j = sample_matrix(make(EnsembleClass::AII_DAG, n));
        CHECK(j.rows() == 2 * n);
        auto sig = self_dual_sigma(n);
        Eigen::MatrixXcd rhs = sig * j.transpose() * sig;
        CHECK((j - rhs).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("class A entry variance: E Tr JJ^dagger = N") {
    const int n = 1024, samples = 100;
    std::vector<double> tr;
    for (int i = 0; i < samples; ++i) {
        auto j = sample_matrix(make(EnsembleClass::A, n, 99, i));
        tr.push_back(j.squaredNorm());
    }
    double mean = std::accumulate(tr.begin(), tr.end(), 0.0) / samples;
    double var = 0.0;
    for (double t : tr) var += (t - mean) * (t - mean);
    var /= (samples - 1);
    double se = std::sqrt(var / samples);
    CHECK(std::abs(mean - n) < 3.0 * se);
    CHECK(se > 0.0);
}

TEST_CASE("reproducibility and stream independence") {
    auto s = make(EnsembleClass::A, 64, 123, 5);
    CHECK((sample_matrix(s) - sample_matrix(s)).cwiseAbs().maxCoeff() == 0.0);
    auto s2 = s;
    s2.sample_index = 6;
    auto x = sample_matrix(s), y = sample_matrix(s2);
    CHECK((x - y).cwiseAbs().maxCoeff() > 0.0);
    // pairwise correlation of real parts across two streams, and across seeds
    auto corr = [](const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& q) {
        Eigen::ArrayXd a = p.real().reshaped().array(), b = q.real().reshaped().array();
        a -= a.mean();
        b -= b.mean();
        return (a * b).sum() / std::sqrt((a * a).sum() * (b * b).sum());
    };
    const double bound = 4.0 / 64.0;  // 4 / sqrt(64*64)
    CHECK(std::abs(corr(x, y)) < bound);
    auto s3 = s;
    s3.seed = 124;
    CHECK(std::abs(corr(x, sample_matrix(s3))) < bound);
    for (int k = 0; k < 20; ++k) {
        auto sa = make(EnsembleClass::A, 64, 1, k), sb = make(EnsembleClass::A, 64, 1, k + 1);
        CHECK(std::abs(corr(sample_matrix(sa), sample_matrix(sb))) < bound);
    }
}

TEST_CASE("eGinUE at tau = 0 reproduces class A bit for bit") {
    for (std::uint64_t idx : {0ull, 1ull, 77ull}) {
        auto a = make(EnsembleClass::A, 40, 5, idx);
        auto e = make(EnsembleClass::EGINUE, 40, 5, idx);
        e.tau = 0.0;
        CHECK((sample_matrix(a) - sample_matrix(e)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("eGinUE correlation E[J_jk J_kj] = tau/N and Hermitian limit") {
    const int n = 200;
    const double tau = 0.5;
    double acc = 0.0, acc2 = 0.0;
    long cnt = 0;
    for (int s = 0; s < 5; ++s) {
        auto sp = make(EnsembleClass::EGINUE, n, 8, s);
        sp.tau = tau;
        auto j = sample_matrix(sp);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < c; ++r) {
                acc += (j(r, c) * j(c, r)).real() * n;
                acc2 += std::norm(j(r, c)) * n;
                ++cnt;
            }
    }
    CHECK(acc / cnt == doctest::Approx(tau).epsilon(0.03));
    CHECK(acc2 / cnt == doctest::Approx(1.0).epsilon(0.02));
    auto sp = make(EnsembleClass::EGINUE, 64, 3, 0);
    sp.tau = 0.9999;
    auto j = sample_matrix(sp);
    CHECK((j - j.adjoint()).norm() / j.norm() < 0.02);
}

TEST_CASE("Poisson point sets") {
    CHECK(poisson_two_sigma_squared(1024) ==
          doctest::Approx(-(0.96875 * 0.96875) / std::log(1.0 - 0.96875 * 0.96875)).epsilon(1e-14));
    const int n = 1024, samples = 200;
    const double r = 1.0 - 1.0 / std::sqrt(1024.0);
    long inside = 0, total = 0;
    cd mean{0.0, 0.0};
    double var_re = 0.0;
    for (int s = 0; s < samples; ++s) {
        auto sp = sample_poisson(make(EnsembleClass::POISSON_GAUSS, n, 4, s));
        CHECK(sp.eigenvalues.size() == static_cast<std::size_t>(n));
        for (auto z : sp.eigenvalues) {
            inside += std::abs(z) < r;
            ++total;
            mean += z;
            var_re += z.real() * z.real();
        }
    }
    double p = static_cast<double>(inside) / total;
    double se = std::sqrt(r * r * (1 - r * r) / total);
    CHECK(std::abs(p - r * r) < 4.0 * se);
    mean /= static_cast<double>(total);
    double sigma = std::sqrt(poisson_two_sigma_squared(n) / 2.0);
    CHECK(std::abs(mean.real()) < 3.0 * sigma / std::sqrt(total));
    CHECK(std::abs(mean.imag()) < 3.0 * sigma / std::sqrt(total));
    CHECK(var_re / total == doctest::Approx(sigma * sigma).epsilon(0.01));
    // reproducible
    auto a = sample_poisson(make(EnsembleClass::POISSON_GAUSS, 16, 9, 3));
    auto b = sample_poisson(make(EnsembleClass::POISSON_GAUSS, 16, 9, 3));
    CHECK(a.eigenvalues == b.eigenvalues);
}

TEST_CASE("collapse_degeneracy examples") {
    Spectrum s;
    s.spec = make(EnsembleClass::AII_DAG, 2);
    cd a{0.3, -0.2}, b{-0.5, 0.1};
    s.eigenvalues = {a, b, a, b};
    auto c = collapse_degeneracy(s);
    REQUIRE(c.eigenvalues.size() == 2);
    CHECK(c.eigenvalues[0] == a);
    CHECK(c.eigenvalues[1] == b);
    CHECK(c.degeneracy_collapsed);

    s.eigenvalues = {a, b, a + cd{1e-12, 0.0}, b - cd{0.0, 1e-12}};
    CHECK(collapse_degeneracy(s, 1e-8).eigenvalues.size() == 2);

    s.eigenvalues = {a, b, a + cd{1e-3, 0.0}, b};
    CHECK_THROWS_AS(collapse_degeneracy(s, 1e-8), PairingError);

    Spectrum wrong;
    wrong.spec = make(EnsembleClass::A, 2);
    wrong.eigenvalues = {a, a};
    CHECK_THROWS_AS(collapse_degeneracy(wrong), ConfigError);
}

TEST_CASE("AII_DAG spectra are Kramers degenerate and collapse to N points") {
    for (int n : {8, 64, 128}) {
        auto spec = make(EnsembleClass::AII_DAG, n, 21, 2);
        Spectrum sp;
        sp.spec = spec;
        sp.eigenvalues = eigenvalues(sample_matrix(spec)).eigenvalues;
        REQUIRE(sp.eigenvalues.size() == static_cast<std::size_t>(2 * n));
        auto c = collapse_degeneracy(sp);
        CHECK(c.eigenvalues.size() == static_cast<std::size_t>(n));
        CHECK(c.degeneracy_collapsed);
    }
}
