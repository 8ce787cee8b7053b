#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhrmt/ensembles.hpp"
#include "nhrmt/errors.hpp"
#include "nhrmt/neighbors.hpp"
#include "nhrmt/stats.hpp"
#include "nhrmt/unfold.hpp"

namespace nhrmt {

enum class UnfoldPolicy { NONE, EDGE_ONLY, EDGE_AND_POISSON_BULK };
std::string to_string(UnfoldPolicy p);
UnfoldPolicy parse_unfold_policy(const std::string& name);

// Source of the spectra in the second pass. AUTO keeps them in memory when
// they fit under memory_limit_points and replays from seeds otherwise.
enum class SecondPass { AUTO, MEMORY, REPLAY, ARCHIVE };
std::string to_string(SecondPass p);
SecondPass parse_second_pass(const std::string& name);

struct ExperimentConfig {
    EnsembleSpec ensemble;  // sample_index is ignored
    std::uint64_t samples = 1;
    std::optional<RegionBounds> bounds;  // defaults from the effective size when empty
    UnfoldPolicy unfold_policy = UnfoldPolicy::EDGE_AND_POISSON_BULK;
    unsigned workers = 1;  // NHRMT_WORKERS overrides
    std::uint64_t checkpoint_every = 0;  // 0 disables checkpoints
    std::filesystem::path output_dir;    // checkpoints and the archive live here
    bool resume = true;
    SecondPass second_pass = SecondPass::AUTO;
    std::filesystem::path archive_path;  // ARCHIVE mode; default output_dir/eigenvalues.bin
    std::uint64_t memory_limit_points = std::uint64_t{1} << 25;
    StatBinning binning;
    std::size_t radial_bins = kDefaultRadialBins;
    double radial_max = kDefaultRadialMax;
    std::size_t radial_output_bins = 300;

    void validate() const;
    RegionBounds effective_bounds() const;
    unsigned effective_workers() const;
    std::filesystem::path effective_archive_path() const;
};

// JSON config file; keys mirror the struct fields, the ensemble as
// {"ensemble": "a", "n": 256, "tau": null, "seed": 42}.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentResult {
    StatAccumulator bulk, edge, edge_ext;  // edge_ext also holds the edge points
    RadialHistogram radial;
    RegionBounds bounds;
    std::uint64_t samples = 0;
    std::uint64_t total_points = 0;
    std::uint64_t neither = 0;  // points in no region

    const StatAccumulator& region(Region r) const;
    bool operator==(const ExperimentResult&) const = default;
};

// Thrown when the stop callback asks the run to halt after a checkpoint.
struct RunInterrupted : Error {
    using Error::Error;
};

struct RunControl {
    // Called after each completed chunk with (pass, samples done in that pass);
    // returning true stops the run.
    std::function<bool(int, std::uint64_t)> stop;
};

// Sampled, diagonalized and (class AII-dagger) degeneracy-collapsed spectrum.
Spectrum produce_spectrum(const EnsembleSpec& ensemble, std::uint64_t sample_index);

struct SpectrumSamples {
    std::vector<RatioSample> ratios;
    std::vector<SpacingSample> spacings;
};

// Ratio and spacing samples of every point; unfolded distances are filled
// where the policy applies and equal the raw ones elsewhere.
SpectrumSamples analyze_spectrum(std::span<const std::complex<double>> points, const RegionBounds& bounds,
                                 const UnfoldingMap* map, UnfoldPolicy policy, bool poisson);

ExperimentResult run(const ExperimentConfig& cfg, const RunControl& control = {});

// moments.json, marginals.csv, ratio2d.csv, spacing.csv, radial_density.csv
void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace nhrmt
