#include "nhrmt/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nhrmt/errors.hpp"

namespace nhrmt {

std::string to_string(Region r) {
    switch (r) {
        case Region::BULK: return "bulk";
        case Region::EDGE: return "edge";
        case Region::EDGE_EXT: return "edge_ext";
        case Region::NEITHER: return "neither";
    }
    return "?";
}

RegionBounds RegionBounds::defaults(int n_effective) {
    if (n_effective < 2) throw ConfigError("RegionBounds: n_effective must be >= 2");
    RegionBounds b;
    const double rt = std::sqrt(static_cast<double>(n_effective));
    b.n_effective = n_effective;
    b.r_edge = 1.0 - 1.0 / rt;
    b.r_edge_ext = std::max(1.0 - 2.0 / rt, 0.5 * b.r_edge);
    b.r_bulk = std::min(0.8, 0.9 * b.r_edge_ext);
    return b;
}

void RegionBounds::validate() const {
    if (!(r_bulk > 0.0 && r_bulk < r_edge_ext && r_edge_ext < r_edge && r_edge < 1.0))
        throw ConfigError("RegionBounds: need 0 < r_bulk < r_edge_ext < r_edge < 1");
}

Region classify_region(std::complex<double> z, const RegionBounds& b) {
    const double r = std::abs(z);
    if (r < b.r_bulk) return Region::BULK;
    if (r > b.r_edge) return Region::EDGE;
    if (r > b.r_edge_ext) return Region::EDGE_EXT;
    return Region::NEITHER;
}

namespace {

struct Best2 {
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    std::size_t i1 = 0, i2 = 0;
    int found = 0;

    static bool less(double da, std::size_t ia, double db, std::size_t ib) {
        return da < db || (da == db && ia < ib);
    }
    void offer(double d, std::size_t i) {
        if (found == 0 || less(d, i, d1, i1)) {
            d2 = d1;
            i2 = i1;
            d1 = d;
            i1 = i;
        } else if (found == 1 || less(d, i, d2, i2)) {
            d2 = d;
            i2 = i;
        }
        ++found;
    }
};

void check_query(std::span<const std::complex<double>> points, std::size_t k) {
    if (points.size() < 3) throw DomainError("nn_nnn: need at least 3 points");
    if (k >= points.size()) throw DomainError("nn_nnn: index out of range");
}

}  // namespace

NeighborPair nn_nnn(std::span<const std::complex<double>> points, std::size_t k) {
    check_query(points, k);
    Best2 b;
    const auto z = points[k];
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (j == k) continue;
        b.offer(std::norm(points[j] - z), j);
    }
    return {b.i1, b.i2};
}

NeighborIndex::NeighborIndex(std::span<const std::complex<double>> points) : pts_(points) {
    if (points.size() < 3) throw DomainError("NeighborIndex: need at least 3 points");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (auto z : points) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw DomainError("NeighborIndex: non-finite point");
        xmin = std::min(xmin, z.real());
        xmax = std::max(xmax, z.real());
        ymin = std::min(ymin, z.imag());
        ymax = std::max(ymax, z.imag());
    }
    const double n = static_cast<double>(points.size());
    double w = xmax - xmin, h = ymax - ymin;
    double extent = std::max(w, h);
    if (extent == 0.0) extent = 1.0;
    double area = std::max(w * h, extent * extent / n);
    // about two mean spacings per cell side
    h_ = 2.0 * std::sqrt(area / n);
    x0_ = xmin;
    y0_ = ymin;
    nx_ = std::max(1, static_cast<int>(std::min(w / h_, 4.0 * n)) + 1);
    ny_ = std::max(1, static_cast<int>(std::min(h / h_, 4.0 * n)) + 1);

    const std::size_t cells = static_cast<std::size_t>(nx_) * ny_;
    std::vector<std::size_t> cell_of(points.size());
    cell_start_.assign(cells + 1, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        cell_of[i] = static_cast<std::size_t>(cell_y(points[i].imag())) * nx_ + cell_x(points[i].real());
        ++cell_start_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
    cell_items_.resize(points.size());
    std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) cell_items_[fill[cell_of[i]]++] = i;
}

int NeighborIndex::cell_x(double x) const {
    return std::clamp(static_cast<int>((x - x0_) / h_), 0, nx_ - 1);
}

int NeighborIndex::cell_y(double y) const {
    return std::clamp(static_cast<int>((y - y0_) / h_), 0, ny_ - 1);
}

NeighborPair NeighborIndex::query(std::size_t k) const {
    check_query(pts_, k);
    const auto z = pts_[k];
    const int cx = cell_x(z.real()), cy = cell_y(z.imag());
    Best2 b;
    auto scan = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= nx_ || y >= ny_) return;
        const std::size_t c = static_cast<std::size_t>(y) * nx_ + x;
        for (std::size_t p = cell_start_[c]; p < cell_start_[c + 1]; ++p) {
            const std::size_t j = cell_items_[p];
            if (j != k) b.offer(std::norm(pts_[j] - z), j);
        }
    };
    const int max_ring = std::max(nx_, ny_);
    for (int r = 0; r <= max_ring; ++r) {
        if (r == 0) {
            scan(cx, cy);
        } else {
            for (int x = cx - r; x <= cx + r; ++x) {
                scan(x, cy - r);
                scan(x, cy + r);
            }
            for (int y = cy - r + 1; y <= cy + r - 1; ++y) {
                scan(cx - r, y);
                scan(cx + r, y);
            }
        }
        // Unvisited cells lie at least r*h away; stop once the runner-up is
        // strictly closer (a point at exactly that distance could still win a tie).
        if (b.found >= 2) {
            const double bound = r * h_ * (1.0 - 1e-12);
            if (b.d2 < bound * bound) break;
        }
    }
    return {b.i1, b.i2};
}

RatioSample make_ratio(std::span<const std::complex<double>> points, std::size_t k, NeighborPair nb,
                       const RegionBounds& bounds) {
    const auto z = points[k];
    const auto a = points[nb.nn] - z;
    const auto c = points[nb.nnn] - z;
    RatioSample s;
    s.nn_dist = std::abs(a);
    s.nnn_dist = std::abs(c);
    s.lambda = a / c;
    s.ref_radius = std::abs(z);
    s.region = classify_region(z, bounds);
    return s;
}

RatioSample ratio(std::span<const std::complex<double>> points, std::size_t k, const RegionBounds& bounds) {
    return make_ratio(points, k, nn_nnn(points, k), bounds);
}

}  // namespace nhrmt
