#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "nhrmt/errors.hpp"
#include "nhrmt/neighbors.hpp"

using namespace nhrmt;
using cd = std::complex<double>;

namespace {

// O(n^2) oracle: full sort of (distance, index) pairs.
NeighborPair brute(const std::vector<cd>& p, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (j != k) d.emplace_back(std::norm(p[j] - p[k]), j);
    std::sort(d.begin(), d.end());
    return {d[0].second, d[1].second};
}

std::vector<cd> random_points(std::mt19937_64& g, std::size_t n, int shape) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cd> p;
    while (p.size() < n) {
        cd z{u(g), u(g)};
        if (shape == 0 && std::abs(z) > 1.0) continue;
        if (shape == 1) z = {z.real() * 10.0, z.imag() * 0.01};  // thin strip
        if (shape == 2) z = {std::round(z.real() * 8.0), std::round(z.imag() * 8.0)};  // lattice ties
        p.push_back(z);
    }
    return p;
}

}  // namespace

TEST_CASE("region bounds at N=1024") {
    auto b = RegionBounds::defaults(1024);
    CHECK(b.r_edge == doctest::Approx(0.96875).epsilon(1e-15));
    CHECK(b.r_edge_ext == doctest::Approx(0.9375).epsilon(1e-15));
    CHECK(b.r_bulk == 0.8);
    CHECK(classify_region(0.5, b) == Region::BULK);
    CHECK(classify_region(cd{0.0, 0.97}, b) == Region::EDGE);
    CHECK(classify_region(0.9, b) == Region::NEITHER);
    CHECK(classify_region(0.95, b) == Region::EDGE_EXT);
    CHECK(in_edge_ext(classify_region(0.99, b)));
}

TEST_CASE("region bounds keep their ordering for small n") {
    for (int n : {2, 3, 4, 9, 16, 25, 64, 100, 256, 4096}) {
        auto b = RegionBounds::defaults(n);
        CHECK_NOTHROW(b.validate());
        CHECK(b.r_edge == doctest::Approx(1.0 - 1.0 / std::sqrt(double(n))));
    }
    CHECK_THROWS_AS(RegionBounds::defaults(1), ConfigError);
    RegionBounds bad{0.95, 0.9, 0.92, 100};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("nn_nnn hand examples") {
    std::vector<cd> p{0.0, 1.0, cd{0.0, 2.0}, 5.0};
    auto nb = nn_nnn(p, 0);
    CHECK(nb.nn == 1);
    CHECK(nb.nnn == 2);
    std::vector<cd> tie{0.0, 1.0, -1.0, 3.0};
    nb = nn_nnn(tie, 0);
    CHECK(nb.nn == 1);
    CHECK(nb.nnn == 2);
    NeighborIndex idx(tie);
    CHECK(idx.query(0).nn == 1);
    CHECK(idx.query(0).nnn == 2);
    std::vector<cd> two{0.0, 1.0};
    CHECK_THROWS_AS(nn_nnn(two, 0), DomainError);
    CHECK_THROWS_AS(nn_nnn(p, 4), DomainError);
}

TEST_CASE("ratio hand examples") {
    auto b = RegionBounds::defaults(1024);
    std::vector<cd> p{0.0, 1.0, cd{0.0, 2.0}};
    auto r = ratio(p, 0, b);
    CHECK(r.lambda.real() == doctest::Approx(0.0));
    CHECK(r.lambda.imag() == doctest::Approx(-0.5));
    CHECK(r.region == Region::BULK);
    const double eps = 1e-9;
    std::vector<cd> q{0.0, eps, cd{0.0, eps}};
    r = ratio(q, 0, b);
    CHECK(std::abs(r.lambda) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.nn_dist == r.nnn_dist);
}

TEST_CASE("grid index equals brute force on 1000 instances") {
    std::mt19937_64 g(7);
    std::uniform_int_distribution<int> size(3, 512);
    int mismatches = 0;
    for (int inst = 0; inst < 1000; ++inst) {
        auto p = random_points(g, size(g), inst % 3);
        NeighborIndex idx(p);
        for (std::size_t k = 0; k < p.size(); ++k) {
            auto a = idx.query(k);
            auto b = brute(p, k);
            auto c = nn_nnn(p, k);
            if (a.nn != b.nn || a.nnn != b.nnn || c.nn != b.nn || c.nnn != b.nnn) ++mismatches;
        }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("ratio properties on random sets") {
    std::mt19937_64 g(11);
    auto b = RegionBounds::defaults(50);
    auto p = random_points(g, 50, 0);
    const cd shift{0.3, -0.7};
    const cd rot = std::polar(1.0, 0.9);
    std::vector<cd> moved, scaled;
    for (auto z : p) {
        moved.push_back(rot * z + shift);
        scaled.push_back(3.5 * z);
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto r = ratio(p, k, b);
        CHECK(std::abs(r.lambda) <= 1.0);
        CHECK(r.nn_dist <= r.nnn_dist);
        auto nb = brute(p, k);
        cd expect = (p[nb.nn] - p[k]) / (p[nb.nnn] - p[k]);
        CHECK(r.lambda == expect);
        CHECK(r.ref_radius == std::abs(p[k]));
        auto rm = ratio(moved, k, b);
        CHECK(std::abs(rm.lambda - r.lambda) < 1e-12);
        auto rs = ratio(scaled, k, b);
        CHECK(std::abs(rs.lambda) == doctest::Approx(std::abs(r.lambda)).epsilon(1e-13));
    }
}
