#include "nhrmt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nhrmt/errors.hpp"
#include "numeric_util.hpp"

namespace nhrmt {

const char* moment_key(Moment m) {
    switch (m) {
        case Moment::R: return "r";
        case Moment::R2: return "r2";
        case Moment::COS: return "cos_phi";
        case Moment::COS2: return "cos2_phi";
        case Moment::R_COS: return "r_cos_phi";
        case Moment::SIN2: return "sin2_phi";
    }
    return "?";
}

StatAccumulator::StatAccumulator(StatBinning binning) : binning_(binning) {
    if (binning_.ratio_grid < 1 || binning_.marginal_bins < 1 || binning_.spacing_bins < 1 ||
        !(binning_.spacing_max > 0.0))
        throw ConfigError("StatBinning: bin counts and spacing_max must be positive");
    hist2d_.assign(static_cast<std::size_t>(binning_.ratio_grid) * binning_.ratio_grid, 0);
    radial_.assign(binning_.marginal_bins, 0);
    angular_.assign(binning_.marginal_bins, 0);
}

namespace {

std::size_t bin_index(double x, double lo, double hi, std::size_t n) {
    double t = (x - lo) / (hi - lo) * static_cast<double>(n);
    if (!(t > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(t), n - 1);
}

bool same_binning(const StatBinning& a, const StatBinning& b) {
    return a.ratio_grid == b.ratio_grid && a.marginal_bins == b.marginal_bins && a.spacing_bins == b.spacing_bins &&
           a.spacing_max == b.spacing_max;
}

}  // namespace

void StatAccumulator::add_spectrum_ratios(std::uint64_t sample_index, std::span<const RatioSample> samples) {
    if (samples.empty()) return;
    RatioBatch batch;
    batch.sample_index = sample_index;
    const auto g = static_cast<std::size_t>(binning_.ratio_grid);
    const auto mb = static_cast<std::size_t>(binning_.marginal_bins);
    for (const auto& s : samples) {
        const double x = s.lambda.real(), y = s.lambda.imag();
        const double r = std::abs(s.lambda);
        const double c = r > 0.0 ? x / r : 1.0;
        const double sn = r > 0.0 ? y / r : 0.0;
        const double f[kMomentCount] = {r, r * r, c, c * c, x, sn * sn};
        for (int j = 0; j < kMomentCount; ++j) {
            batch.sum[j] += f[j];
            batch.sum_sq[j] += f[j] * f[j];
        }
        ++batch.count;
        ++hist2d_[bin_index(y, -1.0, 1.0, g) * g + bin_index(x, -1.0, 1.0, g)];
        ++radial_[bin_index(r, 0.0, 1.0, mb)];
        ++angular_[bin_index(std::arg(s.lambda), -std::numbers::pi, std::numbers::pi, mb)];
    }
    ratio_count_ += batch.count;
    batches_.push_back(batch);
}

void StatAccumulator::add_spacings(std::uint64_t sample_index, std::span<const SpacingSample> samples) {
    for (const auto& s : samples)
        spacings_.push_back({sample_index, s.s_nn, s.s_nnn, s.s_nn_unfolded, s.s_nnn_unfolded});
}

void StatAccumulator::merge(const StatAccumulator& other) {
    if (!same_binning(binning_, other.binning_)) throw ConfigError("StatAccumulator::merge: binning differs");
    for (std::size_t i = 0; i < hist2d_.size(); ++i) hist2d_[i] += other.hist2d_[i];
    for (std::size_t i = 0; i < radial_.size(); ++i) radial_[i] += other.radial_[i];
    for (std::size_t i = 0; i < angular_.size(); ++i) angular_[i] += other.angular_[i];
    ratio_count_ += other.ratio_count_;
    batches_.insert(batches_.end(), other.batches_.begin(), other.batches_.end());
    spacings_.insert(spacings_.end(), other.spacings_.begin(), other.spacings_.end());
}

void StatAccumulator::canonicalize() {
    std::stable_sort(batches_.begin(), batches_.end(),
                     [](const RatioBatch& a, const RatioBatch& b) { return a.sample_index < b.sample_index; });
    std::stable_sort(spacings_.begin(), spacings_.end(),
                     [](const SpacingRecord& a, const SpacingRecord& b) { return a.sample_index < b.sample_index; });
}

StatAccumulator StatAccumulator::from_parts(StatBinning binning, std::vector<std::uint64_t> hist2d,
                                            std::vector<std::uint64_t> radial, std::vector<std::uint64_t> angular,
                                            std::vector<RatioBatch> batches, std::vector<SpacingRecord> spacings) {
    StatAccumulator acc(binning);
    if (hist2d.size() != acc.hist2d_.size() || radial.size() != acc.radial_.size() ||
        angular.size() != acc.angular_.size())
        throw ConfigError("StatAccumulator: histogram sizes do not match binning");
    acc.hist2d_ = std::move(hist2d);
    acc.radial_ = std::move(radial);
    acc.angular_ = std::move(angular);
    acc.batches_ = std::move(batches);
    acc.spacings_ = std::move(spacings);
    for (const auto& b : acc.batches_) acc.ratio_count_ += b.count;
    return acc;
}

MomentSummary moments(const StatAccumulator& acc) {
    if (acc.ratio_count() < 2) throw InsufficientDataError("moments: need at least 2 ratio samples");
    std::vector<const RatioBatch*> order;
    for (const auto& b : acc.batches()) order.push_back(&b);
    std::stable_sort(order.begin(), order.end(),
                     [](const RatioBatch* a, const RatioBatch* b) { return a->sample_index < b->sample_index; });

    MomentSummary out;
    out.count = acc.ratio_count();
    out.spectra = order.size();
    const double n = static_cast<double>(out.count);
    for (int j = 0; j < kMomentCount; ++j) {
        detail::NeumaierSum<double> s, ss;
        for (const auto* b : order) {
            s.add(b->sum[j]);
            ss.add(b->sum_sq[j]);
        }
        const double mean = s.value() / n;
        double var_of_mean;
        if (order.size() >= 2) {
            // ratio estimator over spectra
            detail::NeumaierSum<double> dev;
            for (const auto* b : order) {
                const double d = b->sum[j] - mean * static_cast<double>(b->count);
                dev.add(d * d);
            }
            const double k = static_cast<double>(order.size());
            var_of_mean = k / (k - 1.0) * dev.value() / (n * n);
        } else {
            const double var = std::max(0.0, (ss.value() - n * mean * mean) / (n - 1.0));
            var_of_mean = var / n;
        }
        out.values[j] = {mean, std::sqrt(var_of_mean)};
    }
    return out;
}

namespace {

Histogram1D make_hist(const std::vector<std::uint64_t>& counts, double lo, double hi, std::uint64_t total,
                      std::uint64_t out_of_range) {
    Histogram1D h;
    h.lo = lo;
    h.hi = hi;
    h.total = total;
    h.out_of_range = out_of_range;
    const std::size_t n = counts.size();
    const double w = (hi - lo) / static_cast<double>(n);
    const double norm = total ? 1.0 / (static_cast<double>(total) * w) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        h.centers.push_back(lo + (static_cast<double>(i) + 0.5) * w);
        h.density.push_back(static_cast<double>(counts[i]) * norm);
        h.stderr_.push_back(std::sqrt(static_cast<double>(counts[i])) * norm);
    }
    return h;
}

double mean_of(const std::vector<double>& sorted) {
    detail::NeumaierSum<double> s;
    for (double v : sorted) s.add(v);
    return s.value() / static_cast<double>(sorted.size());
}

std::vector<double> sorted_values(const StatAccumulator& acc, bool nnn) {
    std::vector<double> v;
    v.reserve(acc.spacing_count());
    for (const auto& r : acc.spacings()) v.push_back(nnn ? r.s_nnn_used : r.s_nn_used);
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

std::pair<Histogram1D, Histogram1D> marginals(const StatAccumulator& acc) {
    const auto bins = static_cast<std::uint64_t>(acc.binning().marginal_bins);
    if (acc.ratio_count() < bins) throw InsufficientDataError("marginals: fewer samples than bins");
    return {make_hist(acc.radial_counts(), 0.0, 1.0, acc.ratio_count(), 0),
            make_hist(acc.angular_counts(), -std::numbers::pi, std::numbers::pi, acc.ratio_count(), 0)};
}

Histogram2D ratio_density(const StatAccumulator& acc) {
    if (acc.ratio_count() == 0) throw InsufficientDataError("ratio_density: no samples");
    Histogram2D h;
    const int g = acc.binning().ratio_grid;
    h.nx = g;
    h.total = acc.ratio_count();
    const double w = 2.0 / g;
    for (int i = 0; i < g; ++i) {
        h.x_centers.push_back(-1.0 + (i + 0.5) * w);
        h.y_centers.push_back(-1.0 + (i + 0.5) * w);
    }
    const double norm = 1.0 / (static_cast<double>(h.total) * w * w);
    for (auto c : acc.ratio_hist2d()) h.density.push_back(static_cast<double>(c) * norm);
    return h;
}

std::vector<double> sorted_nn(const StatAccumulator& acc, bool normalize) {
    auto v = sorted_values(acc, false);
    if (normalize && !v.empty()) {
        const double m = mean_of(v);
        if (!(m > 0.0)) throw InsufficientDataError("sorted_nn: zero mean spacing");
        for (auto& x : v) x /= m;
    }
    return v;
}

std::vector<double> sorted_nnn(const StatAccumulator& acc, bool normalize_by_nn_mean) {
    auto v = sorted_values(acc, true);
    if (normalize_by_nn_mean && !v.empty()) {
        const double m = mean_of(sorted_values(acc, false));
        if (!(m > 0.0)) throw InsufficientDataError("sorted_nnn: zero mean spacing");
        for (auto& x : v) x /= m;
    }
    return v;
}

SpacingHistograms spacing_histograms(const StatAccumulator& acc, bool first_moment_normalize) {
    if (acc.spacing_count() < 1000) throw InsufficientDataError("spacing_histograms: need at least 1000 spacings");
    const auto nn = sorted_values(acc, false);
    const auto nnn = sorted_values(acc, true);
    SpacingHistograms out;
    out.scale = first_moment_normalize ? mean_of(nn) : 1.0;
    if (!(out.scale > 0.0)) throw InsufficientDataError("spacing_histograms: zero mean spacing");
    const auto bins = static_cast<std::size_t>(acc.binning().spacing_bins);
    const double hi = acc.binning().spacing_max;
    auto fill = [&](const std::vector<double>& v) {
        std::vector<std::uint64_t> c(bins, 0);
        std::uint64_t out_of_range = 0;
        for (double x : v) {
            const double t = x / out.scale;
            if (t >= hi) {
                ++out_of_range;
                continue;
            }
            ++c[bin_index(t, 0.0, hi, bins)];
        }
        return make_hist(c, 0.0, hi, v.size(), out_of_range);
    };
    out.nn = fill(nn);
    out.nnn = fill(nnn);
    return out;
}

namespace {

constexpr int kJackknifeGroups = 20;

struct LineFit {
    double slope = 0.0, intercept = 0.0;
    std::size_t points = 0;
};

// Least squares of log F_n(s) on log s over s <= s_max, with F_n at the
// midpoint plotting position (i - 1/2)/n. Entries of group `skip` are left out.
LineFit fit_cumulative(const std::vector<std::pair<double, int>>& sorted, double s_max, int skip) {
    std::size_t n = 0;
    for (const auto& e : sorted)
        if (e.second != skip) ++n;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t rank = 0, m = 0;
    for (const auto& [v, g] : sorted) {
        if (v > s_max) break;
        if (g == skip) continue;
        ++rank;
        if (!(v > 0.0)) continue;
        const double x = std::log(v);
        const double y = std::log((static_cast<double>(rank) - 0.5) / static_cast<double>(n));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    LineFit f;
    f.points = m;
    if (m < 2) return f;
    const double dm = static_cast<double>(m);
    f.slope = (sxy - sx * sy / dm) / (sxx - sx * sx / dm);
    f.intercept = (sy - f.slope * sx) / dm;
    return f;
}

}  // namespace

ExponentFit small_s_exponent(std::vector<double> values, double s_max_fit) {
    // Points of an empirical CDF are strongly correlated, so the residual-based
    // error of the line fit is far too small; the error comes from a
    // delete-one-group jackknife over contiguous blocks of the input order.
    const std::size_t n = values.size();
    std::vector<std::pair<double, int>> tagged(n);
    for (std::size_t i = 0; i < n; ++i)
        tagged[i] = {values[i], static_cast<int>(i * kJackknifeGroups / std::max<std::size_t>(n, 1))};
    std::sort(tagged.begin(), tagged.end());
    const LineFit full = fit_cumulative(tagged, s_max_fit, -1);
    if (full.points < 100) throw InsufficientDataError("small_s_exponent: need at least 100 spacings below s_max_fit");
    std::vector<double> parts;
    for (int g = 0; g < kJackknifeGroups; ++g) parts.push_back(fit_cumulative(tagged, s_max_fit, g).slope);
    const double k = static_cast<double>(parts.size());
    const double mean = std::accumulate(parts.begin(), parts.end(), 0.0) / k;
    double ss = 0.0;
    for (double p : parts) ss += (p - mean) * (p - mean);
    ExponentFit fit;
    fit.exponent = full.slope;
    fit.intercept = full.intercept;
    fit.stderr_ = std::sqrt((k - 1.0) / k * ss);
    fit.points = full.points;
    return fit;
}

ExponentFit small_s_exponent(const StatAccumulator& acc, double s_max_fit) {
    // Record order keeps each jackknife group a block of whole spectra.
    std::vector<double> v;
    v.reserve(acc.spacing_count());
    for (const auto& r : acc.spacings()) v.push_back(r.s_nn_used);
    if (v.empty()) throw InsufficientDataError("small_s_exponent: no spacings");
    const double m = mean_of(v);
    if (!(m > 0.0)) throw InsufficientDataError("small_s_exponent: zero mean spacing");
    for (auto& x : v) x /= m;
    return small_s_exponent(std::move(v), s_max_fit);
}

double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    if (sorted.empty()) throw InsufficientDataError("ks_distance: empty sample");
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
    }
    return d;
}

}  // namespace nhrmt
