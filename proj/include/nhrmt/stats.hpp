#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nhrmt/neighbors.hpp"

namespace nhrmt {

struct StatBinning {
    int ratio_grid = 200;      // per axis over [-1,1]^2
    int marginal_bins = 100;   // radial over [0,1], angular over (-pi,pi]
    int spacing_bins = 200;
    double spacing_max = 4.0;
    bool operator==(const StatBinning&) const = default;
};

// Functionals of lambda = r e^{i phi} whose means are reported.
enum class Moment { R, R2, COS, COS2, R_COS, SIN2 };
inline constexpr int kMomentCount = 6;
const char* moment_key(Moment m);  // r, r2, cos_phi, cos2_phi, r_cos_phi, sin2_phi

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct MomentSummary {
    std::uint64_t count = 0;
    std::uint64_t spectra = 0;
    std::array<Estimate, kMomentCount> values;
    const Estimate& operator[](Moment m) const { return values[static_cast<int>(m)]; }
};

// One spectrum's contribution to the moment sums (batch-means unit).
struct RatioBatch {
    std::uint64_t sample_index = 0;
    std::uint64_t count = 0;
    std::array<double, kMomentCount> sum{};
    std::array<double, kMomentCount> sum_sq{};
    bool operator==(const RatioBatch&) const = default;
};

// Raw distances plus the ones used for statistics (unfolded where that applies).
struct SpacingRecord {
    std::uint64_t sample_index = 0;
    double s_nn = 0.0;
    double s_nnn = 0.0;
    double s_nn_used = 0.0;
    double s_nnn_used = 0.0;
    bool operator==(const SpacingRecord&) const = default;
};

struct Histogram1D {
    double lo = 0.0, hi = 1.0;
    std::vector<double> centers;
    std::vector<double> density;
    std::vector<double> stderr_;
    std::uint64_t total = 0;
    std::uint64_t out_of_range = 0;
    double width() const { return (hi - lo) / static_cast<double>(centers.size()); }
};

struct Histogram2D {
    int nx = 0;
    std::vector<double> x_centers, y_centers;
    std::vector<double> density;  // row-major, y outer
    std::uint64_t total = 0;
};

struct SpacingHistograms {
    Histogram1D nn, nnn;
    double scale = 1.0;  // distances were divided by this
};

struct ExponentFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double stderr_ = 0.0;
    std::size_t points = 0;
};

// Mergeable aggregate for one region. Histograms hold integer counts; moment
// sums and spacings are kept per spectrum and reduced in sample order, so the
// results do not depend on how work was split or merged.
class StatAccumulator {
public:
    explicit StatAccumulator(StatBinning binning = {});

    void add_spectrum_ratios(std::uint64_t sample_index, std::span<const RatioSample> samples);
    void add_spacings(std::uint64_t sample_index, std::span<const SpacingSample> samples);
    void merge(const StatAccumulator& other);
    // Sorts per-spectrum records by sample index; called before reductions.
    void canonicalize();

    std::uint64_t ratio_count() const { return ratio_count_; }
    std::size_t spacing_count() const { return spacings_.size(); }
    const StatBinning& binning() const { return binning_; }
    const std::vector<RatioBatch>& batches() const { return batches_; }
    const std::vector<SpacingRecord>& spacings() const { return spacings_; }
    const std::vector<std::uint64_t>& ratio_hist2d() const { return hist2d_; }
    const std::vector<std::uint64_t>& radial_counts() const { return radial_; }
    const std::vector<std::uint64_t>& angular_counts() const { return angular_; }

    bool operator==(const StatAccumulator&) const = default;

    // Restore from persisted state.
    static StatAccumulator from_parts(StatBinning binning, std::vector<std::uint64_t> hist2d,
                                      std::vector<std::uint64_t> radial, std::vector<std::uint64_t> angular,
                                      std::vector<RatioBatch> batches, std::vector<SpacingRecord> spacings);

private:
    StatBinning binning_;
    std::uint64_t ratio_count_ = 0;
    std::vector<std::uint64_t> hist2d_;
    std::vector<std::uint64_t> radial_;
    std::vector<std::uint64_t> angular_;
    std::vector<RatioBatch> batches_;
    std::vector<SpacingRecord> spacings_;
};

MomentSummary moments(const StatAccumulator& acc);
std::pair<Histogram1D, Histogram1D> marginals(const StatAccumulator& acc);
Histogram2D ratio_density(const StatAccumulator& acc);
SpacingHistograms spacing_histograms(const StatAccumulator& acc, bool first_moment_normalize);
// Sorted used NN distances, divided by their mean when normalize is set.
std::vector<double> sorted_nn(const StatAccumulator& acc, bool normalize);
std::vector<double> sorted_nnn(const StatAccumulator& acc, bool normalize_by_nn_mean);
ExponentFit small_s_exponent(const StatAccumulator& acc, double s_max_fit);
// Fit on an explicit sample (values need not be sorted).
ExponentFit small_s_exponent(std::vector<double> values, double s_max_fit);
// sup |F_n - F| over a sorted sample.
double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf);

}  // namespace nhrmt
