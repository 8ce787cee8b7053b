#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nhrmt/ensembles.hpp"

namespace nhrmt {

inline constexpr std::size_t kDefaultRadialBins = std::size_t{1} << 20;
inline constexpr double kDefaultRadialMax = 1.5;

// Counts of |z| on a uniform grid over [0, r_max]; points beyond r_max go to
// the overflow tally. Every point, including overflow, enters total().
class RadialHistogram {
public:
    RadialHistogram(std::size_t bins = kDefaultRadialBins, double r_max = kDefaultRadialMax);

    void add(std::complex<double> z);
    void add(std::span<const std::complex<double>> points);
    void merge(const RadialHistogram& other);

    std::size_t bins() const { return counts_.size(); }
    double r_max() const { return r_max_; }
    double bin_width() const { return r_max_ / static_cast<double>(counts_.size()); }
    double bin_center(std::size_t b) const { return (static_cast<double>(b) + 0.5) * bin_width(); }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t overflow() const { return overflow_; }
    std::uint64_t total() const { return total_; }
    // 1/total: turns counts into probability mass.
    double normalization() const;
    // counts(bin)/(total * annulus area)
    double planar_density(std::size_t b) const;

    // Used when restoring from an archive.
    static RadialHistogram from_counts(std::vector<std::uint64_t> counts, double r_max, std::uint64_t overflow);

    bool operator==(const RadialHistogram&) const = default;

private:
    std::vector<std::uint64_t> counts_;
    double r_max_;
    std::uint64_t overflow_ = 0;
    std::uint64_t total_ = 0;
};

RadialHistogram build_radial_histogram(std::span<const Spectrum> spectra, std::size_t bins = kDefaultRadialBins,
                                       double r_max = kDefaultRadialMax);

// Fraction of the circle of radius rho centred at the origin that lies inside
// the closed disc of radius s around a point at distance a from the origin.
double circle_fraction_in_disc(double rho, double a, double s);

// m(s): probability mass of the binned density inside the disc D_s(z0),
// summing each bin's mass times the fraction of its central circle in the disc.
// Visits every bin; the reference implementation.
double disc_density_integral(const RadialHistogram& hist, std::complex<double> z0, double s);

// s' = sqrt(m(s)); with density 1/pi on the unit disc this is s itself.
double unfold_distance(const RadialHistogram& hist, std::complex<double> z0, double s);

// Frozen view of a histogram answering m(s) in roughly logarithmic time.
// Runs of bins away from the two tangent radii |a-s| and a+s are summed with
// a second-order expansion of the arc fraction over exact count moments;
// runs near them are summed bin by bin.
class UnfoldingMap {
public:
    explicit UnfoldingMap(const RadialHistogram& hist);

    double integral(std::complex<double> z0, double s) const;
    double unfold(std::complex<double> z0, double s) const;

private:
    std::size_t nbins_;
    double width_;
    double norm_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> c0_;       // prefix sums of n_b
    std::vector<std::uint64_t> c1_;       // of n_b * b
    std::vector<unsigned __int128> c2_;   // of n_b * b^2

    double exact_range(std::size_t lo, std::size_t hi, double a, double s) const;
    double sum_range(std::size_t lo, std::size_t hi, double a, double s, double sing_lo, double sing_hi) const;
};

}  // namespace nhrmt
