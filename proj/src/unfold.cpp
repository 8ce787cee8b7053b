#include "nhrmt/unfold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nhrmt/errors.hpp"
#include "numeric_util.hpp"

namespace nhrmt {

RadialHistogram::RadialHistogram(std::size_t bins, double r_max) : counts_(bins, 0), r_max_(r_max) {
    if (bins < 1) throw ConfigError("RadialHistogram: need at least one bin");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ConfigError("RadialHistogram: r_max must be positive");
}

void RadialHistogram::add(std::complex<double> z) {
    const double r = std::abs(z);
    ++total_;
    if (!(r < r_max_)) {
        ++overflow_;
        return;
    }
    auto b = static_cast<std::size_t>(r / r_max_ * static_cast<double>(counts_.size()));
    ++counts_[std::min(b, counts_.size() - 1)];
}

void RadialHistogram::add(std::span<const std::complex<double>> points) {
    for (auto z : points) add(z);
}

void RadialHistogram::merge(const RadialHistogram& other) {
    if (other.counts_.size() != counts_.size() || other.r_max_ != r_max_)
        throw ConfigError("RadialHistogram::merge: incompatible grids");
    for (std::size_t b = 0; b < counts_.size(); ++b) counts_[b] += other.counts_[b];
    overflow_ += other.overflow_;
    total_ += other.total_;
}

double RadialHistogram::normalization() const {
    if (total_ == 0) throw InsufficientDataError("RadialHistogram: empty histogram");
    return 1.0 / static_cast<double>(total_);
}

double RadialHistogram::planar_density(std::size_t b) const {
    const double w = bin_width();
    const double r0 = b * w, r1 = (b + 1) * w;
    return static_cast<double>(counts_.at(b)) * normalization() / (std::numbers::pi * (r1 * r1 - r0 * r0));
}

RadialHistogram RadialHistogram::from_counts(std::vector<std::uint64_t> counts, double r_max, std::uint64_t overflow) {
    RadialHistogram h(counts.size(), r_max);
    h.counts_ = std::move(counts);
    h.overflow_ = overflow;
    h.total_ = overflow;
    for (auto c : h.counts_) h.total_ += c;
    return h;
}

RadialHistogram build_radial_histogram(std::span<const Spectrum> spectra, std::size_t bins, double r_max) {
    if (bins < 1000) throw ConfigError("build_radial_histogram: bins must be >= 1000");
    RadialHistogram h(bins, r_max);
    for (const auto& sp : spectra) h.add(sp.eigenvalues);
    return h;
}

double circle_fraction_in_disc(double rho, double a, double s) {
    if (s <= 0.0) return 0.0;
    if (a == 0.0 || rho == 0.0) return std::max(rho, a) <= s ? 1.0 : 0.0;
    if (rho + a <= s) return 1.0;
    if (rho <= a - s || rho >= a + s) return 0.0;
    const double u = (rho * rho + a * a - s * s) / (2.0 * rho * a);
    return std::acos(std::clamp(u, -1.0, 1.0)) / std::numbers::pi;
}

double disc_density_integral(const RadialHistogram& hist, std::complex<double> z0, double s) {
    if (!(s >= 0.0)) throw DomainError("disc_density_integral: s must be nonnegative");
    if (s == 0.0) return 0.0;
    const double a = std::abs(z0);
    detail::NeumaierSum<double> sum;
    const auto& c = hist.counts();
    for (std::size_t b = 0; b < c.size(); ++b) {
        if (c[b] == 0) continue;
        sum.add(static_cast<double>(c[b]) * circle_fraction_in_disc(hist.bin_center(b), a, s));
    }
    return sum.value() * hist.normalization();
}

double unfold_distance(const RadialHistogram& hist, std::complex<double> z0, double s) {
    return std::sqrt(disc_density_integral(hist, z0, s));
}

UnfoldingMap::UnfoldingMap(const RadialHistogram& hist)
    : nbins_(hist.bins()), width_(hist.bin_width()), norm_(hist.normalization()), counts_(hist.counts()) {
    c0_.assign(nbins_ + 1, 0);
    c1_.assign(nbins_ + 1, 0);
    c2_.assign(nbins_ + 1, 0);
    for (std::size_t b = 0; b < nbins_; ++b) {
        const std::uint64_t n = counts_[b];
        c0_[b + 1] = c0_[b] + n;
        c1_[b + 1] = c1_[b] + n * b;
        c2_[b + 1] = c2_[b] + static_cast<unsigned __int128>(n) * b * b;
    }
}

double UnfoldingMap::exact_range(std::size_t lo, std::size_t hi, double a, double s) const {
    double sum = 0.0;
    for (std::size_t b = lo; b < hi; ++b)
        if (counts_[b]) sum += static_cast<double>(counts_[b]) * circle_fraction_in_disc((b + 0.5) * width_, a, s);
    return sum;
}

namespace {
constexpr std::size_t kExactRun = 16;
// Expansion only when the run is this fraction of its distance to a tangent radius.
constexpr double kTaylorReach = 1.0 / 16.0;
}  // namespace

double UnfoldingMap::sum_range(std::size_t lo, std::size_t hi, double a, double s, double sing_lo,
                               double sing_hi) const {
    if (hi <= lo || c0_[hi] == c0_[lo]) return 0.0;
    if (hi - lo <= kExactRun) return exact_range(lo, hi, a, s);
    const double r0 = lo * width_, r1 = hi * width_;
    const double dist = std::min(r0 - sing_lo, sing_hi - r1);
    if (dist > 0.0 && (r1 - r0) <= kTaylorReach * dist) {
        const double rc = 0.5 * (r0 + r1);
        const double k = a * a - s * s;
        const double u = (rc * rc + k) / (2.0 * rc * a);
        const double du = 1.0 / (2.0 * a) - k / (2.0 * a * rc * rc);
        const double d2u = k / (a * rc * rc * rc);
        const double one_m_u2 = 1.0 - u * u;
        const double root = std::sqrt(one_m_u2);
        const double g = std::acos(u) / std::numbers::pi;
        const double dg = -du / (std::numbers::pi * root);
        const double d2g = -(d2u * one_m_u2 + u * du * du) / (std::numbers::pi * one_m_u2 * root);
        // rho_b - rc = (width/2) (2b - t) with t = lo + hi - 1; moments are exact integers.
        const auto t = static_cast<__int128>(lo + hi - 1);
        const auto m0 = static_cast<__int128>(c0_[hi] - c0_[lo]);
        const auto m1 = static_cast<__int128>(c1_[hi] - c1_[lo]);
        const auto m2 = static_cast<__int128>(c2_[hi] - c2_[lo]);
        const __int128 first = 2 * m1 - t * m0;
        const __int128 second = 4 * m2 - 4 * t * m1 + t * t * m0;
        const double hw = 0.5 * width_;
        return g * static_cast<double>(m0) + dg * hw * static_cast<double>(first) +
               0.5 * d2g * hw * hw * static_cast<double>(second);
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return sum_range(lo, mid, a, s, sing_lo, sing_hi) + sum_range(mid, hi, a, s, sing_lo, sing_hi);
}

double UnfoldingMap::integral(std::complex<double> z0, double s) const {
    if (!(s >= 0.0)) throw DomainError("UnfoldingMap: s must be nonnegative");
    if (s == 0.0) return 0.0;
    const double a = std::abs(z0);
    // Bin centres below full_end are inside the disc; at or above part_end, outside.
    auto first_center_above = [&](double r) -> std::size_t {
        if (r < 0.0) return 0;
        double x = r / width_ - 0.5;
        if (x >= static_cast<double>(nbins_)) return nbins_;
        auto b = static_cast<std::size_t>(std::max(0.0, std::floor(x)));
        while (b < nbins_ && (b + 0.5) * width_ <= r) ++b;
        while (b > 0 && (b - 0.5) * width_ > r) --b;
        return b;
    };
    double full = 0.0;
    std::size_t part_lo = 0;
    if (a == 0.0 || s >= a) {
        // circles with rho + a <= s are fully inside
        part_lo = first_center_above(s - a);
        full = static_cast<double>(c0_[part_lo]);
        if (a == 0.0) return full * norm_;
    } else {
        part_lo = first_center_above(a - s);
    }
    std::size_t part_hi = std::max(part_lo, first_center_above(a + s));
    const double partial = sum_range(part_lo, part_hi, a, s, std::abs(a - s), a + s);
    return (full + partial) * norm_;
}

double UnfoldingMap::unfold(std::complex<double> z0, double s) const {
    return std::sqrt(std::max(0.0, integral(z0, s)));
}

}  // namespace nhrmt
