#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nhrmt {

enum class Region { BULK, EDGE, EDGE_EXT, NEITHER };

std::string to_string(Region r);

struct RegionBounds {
    double r_bulk = 0.8;
    double r_edge = 0.0;
    double r_edge_ext = 0.0;
    int n_effective = 0;

    // r_edge = 1 - 1/sqrt(n), r_edge_ext = 1 - 2/sqrt(n), r_bulk = 0.8,
    // with small-n adjustments so the ordering still holds.
    static RegionBounds defaults(int n_effective);
    void validate() const;
    bool operator==(const RegionBounds&) const = default;
};

// BULK if |z| < r_bulk, EDGE if |z| > r_edge, EDGE_EXT if |z| > r_edge_ext,
// otherwise NEITHER. EDGE points also belong to the extended edge.
Region classify_region(std::complex<double> z, const RegionBounds& b);
inline bool in_edge_ext(Region r) { return r == Region::EDGE || r == Region::EDGE_EXT; }

struct NeighborPair {
    std::size_t nn;
    std::size_t nnn;
};

struct RatioSample {
    std::complex<double> lambda;
    double ref_radius = 0.0;
    Region region = Region::NEITHER;
    double nn_dist = 0.0;
    double nnn_dist = 0.0;
};

struct SpacingSample {
    double s_nn = 0.0;
    double s_nnn = 0.0;
    double s_nn_unfolded = 0.0;
    double s_nnn_unfolded = 0.0;
    Region region = Region::NEITHER;
};

// Linear scan; exact ties go to the lower index.
NeighborPair nn_nnn(std::span<const std::complex<double>> points, std::size_t k);

// Uniform-grid index answering the same queries with identical tie handling.
class NeighborIndex {
public:
    explicit NeighborIndex(std::span<const std::complex<double>> points);
    NeighborPair query(std::size_t k) const;

private:
    std::span<const std::complex<double>> pts_;
    double x0_ = 0.0, y0_ = 0.0, h_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::size_t> cell_start_;  // CSR layout over cells
    std::vector<std::size_t> cell_items_;
    int cell_x(double x) const;
    int cell_y(double y) const;
};

RatioSample make_ratio(std::span<const std::complex<double>> points, std::size_t k, NeighborPair nb,
                       const RegionBounds& bounds);
RatioSample ratio(std::span<const std::complex<double>> points, std::size_t k, const RegionBounds& bounds);

}  // namespace nhrmt
