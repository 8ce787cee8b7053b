#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nhrmt/errors.hpp"

namespace nhrmt::cli {

enum class PlotKind { RATIO_DENSITY_2D, MARGINAL, SPACING, SMALL_S_LOGLOG, DENSITY_RADIAL, ANALYTIC_OVERLAY };

// ratio-2d, marginal, spacing, small-s, radial, overlay
PlotKind parse_plot_kind(const std::string& name);
std::string to_string(PlotKind k);

// The first input holds the data layer; further inputs are analytic curves
// (first two columns) drawn as overlays. ANALYTIC_OVERLAY draws every input
// as a curve.
struct PlotSpec {
    PlotKind kind = PlotKind::SPACING;
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out;
    std::string region = "bulk";
    std::string series = "nn";        // SPACING: nn or nnn
    std::string marginal = "radial";  // MARGINAL: radial or angular
    std::optional<double> guide_slope;  // SMALL_S_LOGLOG reference line
    std::string title;

    void validate() const;
};

struct MissingColumnError : IoError {
    MissingColumnError(const std::filesystem::path& file, const std::string& column)
        : IoError("missing column '" + column + "' in " + file.string()), column(column) {}
    std::string column;
};

std::string render_plot(const PlotSpec& spec);
void write_plot(const PlotSpec& spec);

}  // namespace nhrmt::cli
