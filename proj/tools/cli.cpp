#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "nhrmt/analytic.hpp"
#include "nhrmt/edgegap.hpp"
#include "nhrmt/errors.hpp"
#include "nhrmt/harness.hpp"
#include "nhrmt/pentadiagonal.hpp"
#include "plot.hpp"

namespace nhrmt::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kUsage;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
    return kNumeric;
}

namespace {

const std::string f(double v) { return format_double(v); }

std::vector<double> uniform_grid(double lo, double hi, int points) {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1.0);
    return g;
}

// Cell centres of the radial range, avoiding r = 0.
std::vector<double> midpoint_grid(double lo, double hi, int points) {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * (i + 0.5) / points;
    return g;
}

CsvTable tabulate(const std::string& xname, const std::string& yname, const std::vector<double>& xs,
                  const std::function<double(double)>& fn) {
    CsvTable t{{xname, yname}, {}};
    for (double x : xs) t.rows.push_back({f(x), f(fn(x))});
    return t;
}

// Area of [x0,x1] x [y0,y1] inside the unit disc.
double cell_disc_area(double x0, double x1, double y0, double y1) {
    auto prim = [](double x) { return 0.5 * (x * std::sqrt(1 - x * x) + std::asin(x)); };
    std::vector<double> cuts{x0, x1};
    for (double y : {y0, y1})
        if (std::abs(y) < 1) {
            const double c = std::sqrt(1 - y * y);
            cuts.push_back(c);
            cuts.push_back(-c);
        }
    cuts.push_back(-1);
    cuts.push_back(1);
    std::sort(cuts.begin(), cuts.end());
    double area = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = std::max(cuts[i], x0), b = std::min(cuts[i + 1], x1);
        if (!(b > a) || a < -1 || b > 1) continue;
        const double m = 0.5 * (a + b), s = std::sqrt(1 - m * m);
        const bool upper_is_y = y1 < s, lower_is_y = y0 > -s;
        const double up = upper_is_y ? y1 : s, lo = lower_is_y ? y0 : -s;
        if (up <= lo) continue;
        const double arc = prim(b) - prim(a);
        area += (upper_is_y ? y1 * (b - a) : arc) - (lower_is_y ? y0 * (b - a) : -arc);
    }
    return area;
}

// Density on the cells of a grid x grid lattice over [-1,1]^2 that meet the
// unit disc. Nodes outside the disc are moved radially onto it; weight is the
// cell area inside the disc, so sum(density * weight) approximates the integral.
CsvTable tabulate_disc(int grid, const std::function<double(double, double)>& fn) {
    CsvTable t{{"x", "y", "density", "weight"}, {}};
    const double h = 2.0 / grid;
    for (int iy = 0; iy < grid; ++iy)
        for (int ix = 0; ix < grid; ++ix) {
            const double x0 = -1 + ix * h, y0 = -1 + iy * h;
            const double w = cell_disc_area(x0, x0 + h, y0, y0 + h);
            if (!(w > 0)) continue;
            double x = x0 + h / 2, y = y0 + h / 2;
            const double r = std::hypot(x, y);
            if (r >= 1) {
                const double scale = (1 - 1e-12) / r;
                x *= scale;
                y *= scale;
            }
            t.rows.push_back({f(x), f(y), f(fn(x, y)), f(w)});
        }
    return t;
}

SurmiseVariant parse_variant(const std::string& v) {
    if (v == "conditional") return SurmiseVariant::CONDITIONAL;
    if (v == "unconditional") return SurmiseVariant::UNCONDITIONAL;
    throw ConfigError("variant must be conditional or unconditional, got '" + v + "'");
}

GueSurmise parse_gue(const std::string& v) {
    if (v == "consecutive") return GueSurmise::CONSECUTIVE;
    if (v == "nn" || v == "unconditional") return GueSurmise::NN;
    if (v == "conditional-nn" || v == "conditional") return GueSurmise::CONDITIONAL_NN;
    throw ConfigError("gue-surmise variant must be consecutive, nn or conditional-nn, got '" + v + "'");
}

}  // namespace

CsvTable analytic_curve(const std::string& curve, const AnalyticOptions& o) {
    if (o.grid < 2) throw ConfigError("--grid must be at least 2");
    if (o.n < 1) throw ConfigError("--n must be positive");
    const int g = o.grid;
    if (curve == "ginue-density")
        return tabulate("r", "density", midpoint_grid(0, 1.5, g), [&](double r) { return density_ginue(r, o.n); });
    if (curve == "ai-density")
        return tabulate("r", "density", midpoint_grid(0, 1.5, g), [&](double r) { return density_ai_dag(r, o.n); });
    if (curve == "ginue-nn" || curve == "ginue-nnn") {
        const bool nnn = curve == "ginue-nnn";
        const double c = o.rescaled ? ginibre_rescale_constant(o.n) : 1.0;
        const auto xs = uniform_grid(0, nnn ? 5.0 : 4.0, g);
        if (o.rescaled)
            return tabulate("s", "density", xs, [&](double s) {
                return nnn ? ginibre_nnn_rescaled(s, o.n, c) : ginibre_nn_rescaled(s, o.n, c);
            });
        return tabulate("s", "density", xs, [&](double s) { return nnn ? ginibre_nnn(s, o.n) : ginibre_nn(s, o.n); });
    }
    if (curve == "poisson-nn") return tabulate("s", "density", uniform_grid(0, 4, g), poisson_nn);
    if (curve == "poisson-nnn") return tabulate("s", "density", uniform_grid(0, 5, g), poisson_nnn);
    if (curve == "surmise") {
        const SurmiseParams p{o.tau, parse_variant(o.variant)};
        p.validate();
        return tabulate_disc(g, [&](double x, double y) { return surmise_eginue(x, y, p); });
    }
    if (curve == "pentadiagonal") {
        if (o.n < 3) throw ConfigError("pentadiagonal needs --n >= 3");
        const ConditionalRatio rho(PentadiagonalSpec::gaussian(o.n));
        return tabulate_disc(g, [&](double x, double y) { return rho(x, y); });
    }
    if (curve == "gue-surmise") {
        const GueSurmise which = parse_gue(o.variant);
        const auto xs = which == GueSurmise::CONSECUTIVE ? uniform_grid(0, 5, g) : uniform_grid(-1, 1, g);
        return tabulate("x", "density", xs, [&](double x) { return gue_surmise(x, which); });
    }
    if (curve == "hermitian-limit") {
        const SurmiseVariant v = parse_variant(o.variant);
        return tabulate("x", "density", uniform_grid(-1, 1, g),
                        [&](double x) { return hermitian_limit_marginal(x, v); });
    }
    if (curve == "edge-gap") {
        EdgeKernelParams p;
        p.d = o.d;
        p.validate();
        CsvTable t{{"s", "gap", "i1"}, {}};
        for (double s : uniform_grid(0, 3, g)) {
            const double i1 = fredholm_first_term(s, p);
            t.rows.push_back({f(s), f(1.0 - i1), f(i1)});
        }
        return t;
    }
    throw ConfigError("unknown curve '" + curve + "'");
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spacing ratio and spacing statistics of non-Hermitian random matrices", "nhrmt"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Monte Carlo experiment; writes the statistics tables to --out");
    std::string config_file, ensemble, out_dir, second_pass, unfold;
    int n = 0;
    std::uint64_t samples = 0, seed = 0, checkpoint_every = 0;
    double tau = 0;
    unsigned workers = 1;
    std::size_t radial_bins = 0;
    bool fresh = false;
    run_cmd->add_option("--config", config_file, "JSON config file; flags override its fields")->check(CLI::ExistingFile);
    auto* o_ens = run_cmd->add_option("--ensemble", ensemble, "a, eginue, ai, aii or poisson");
    auto* o_n = run_cmd->add_option("--n", n, "matrix size N");
    auto* o_samples = run_cmd->add_option("--samples", samples, "number of spectra");
    auto* o_seed = run_cmd->add_option("--seed", seed, "master seed");
    auto* o_tau = run_cmd->add_option("--tau", tau, "non-Hermiticity for eginue, in [0,1)");
    auto* o_workers = run_cmd->add_option("--workers", workers, "worker threads");
    auto* o_out = run_cmd->add_option("--out", out_dir, "output directory");
    auto* o_ckpt = run_cmd->add_option("--checkpoint-every", checkpoint_every, "samples between checkpoints");
    auto* o_pass = run_cmd->add_option("--second-pass", second_pass, "auto, memory, replay or archive");
    auto* o_unfold = run_cmd->add_option("--unfold", unfold, "none, edge_only or edge_and_poisson_bulk");
    auto* o_bins = run_cmd->add_option("--radial-bins", radial_bins, "fine radial histogram bins");
    run_cmd->add_flag("--fresh", fresh, "ignore an existing checkpoint");

    // analytic
    auto* an_cmd = app.add_subcommand("analytic", "Tabulate an analytic curve as CSV");
    std::string curve, an_out;
    AnalyticOptions ao;
    an_cmd->add_option("curve", curve,
                       "ginue-density, ai-density, ginue-nn, ginue-nnn, poisson-nn, poisson-nnn, surmise, "
                       "gue-surmise, hermitian-limit, pentadiagonal, edge-gap")
        ->required();
    an_cmd->add_option("--n", ao.n, "matrix size or number of terms");
    an_cmd->add_option("--tau", ao.tau, "surmise tau");
    an_cmd->add_option("--variant", ao.variant, "conditional, unconditional; consecutive, nn, conditional-nn");
    an_cmd->add_option("--d", ao.d, "edge distance");
    an_cmd->add_option("--grid", ao.grid, "grid points (per axis for 2D curves)");
    an_cmd->add_flag("--rescaled", ao.rescaled, "first-moment rescaled Ginibre spacing");
    an_cmd->add_option("--out", an_out, "output CSV (stdout when omitted)");

    // plot
    auto* pl_cmd = app.add_subcommand("plot", "Render a table as a static SVG");
    std::string kind;
    PlotSpec ps;
    double guide = 0;
    pl_cmd->add_option("kind", kind, "ratio-2d, marginal, spacing, small-s, radial or overlay")->required();
    pl_cmd->add_option("--in", ps.inputs, "data table, then analytic overlays")->required();
    pl_cmd->add_option("--out", ps.out, "output SVG")->required();
    pl_cmd->add_option("--region", ps.region, "bulk, edge or edge_ext");
    pl_cmd->add_option("--series", ps.series, "nn or nnn");
    pl_cmd->add_option("--marginal", ps.marginal, "radial or angular");
    auto* o_guide = pl_cmd->add_option("--slope", guide, "reference slope for small-s plots");
    pl_cmd->add_option("--title", ps.title, "plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (run_cmd->parsed()) {
            ExperimentConfig cfg;
            if (!config_file.empty()) {
                cfg = load_config(config_file);
            } else {
                if (!o_ens->count() || !o_n->count()) throw ConfigError("run needs --ensemble and --n, or --config");
            }
            if (o_ens->count()) {
                cfg.ensemble.cls = parse_ensemble(ensemble);
                if (cfg.ensemble.cls != EnsembleClass::EGINUE) cfg.ensemble.tau.reset();
            }
            if (o_n->count()) cfg.ensemble.n = n;
            if (o_samples->count()) cfg.samples = samples;
            if (o_seed->count()) cfg.ensemble.seed = seed;
            if (o_tau->count()) cfg.ensemble.tau = tau;
            if (o_workers->count()) cfg.workers = workers;
            if (o_out->count()) cfg.output_dir = out_dir;
            if (o_ckpt->count()) cfg.checkpoint_every = checkpoint_every;
            if (o_pass->count()) cfg.second_pass = parse_second_pass(second_pass);
            if (o_unfold->count()) cfg.unfold_policy = parse_unfold_policy(unfold);
            if (o_bins->count()) cfg.radial_bins = radial_bins;
            if (fresh) cfg.resume = false;
            if (cfg.output_dir.empty()) throw ConfigError("run needs --out");
            cfg.validate();
            const auto result = run(cfg);
            write_outputs(result, cfg, cfg.output_dir);
            for (Region r : {Region::BULK, Region::EDGE, Region::EDGE_EXT}) {
                const auto& acc = result.region(r);
                out << to_string(r) << ": " << acc.ratio_count() << " ratios";
                if (acc.ratio_count() >= 2) {
                    const auto m = moments(acc);
                    out << ", <r> = " << format_double(m[Moment::R].mean) << " +- "
                        << format_double(m[Moment::R].stderr_) << ", <cos phi> = "
                        << format_double(m[Moment::COS].mean) << " +- " << format_double(m[Moment::COS].stderr_);
                }
                out << '\n';
            }
            out << "wrote " << cfg.output_dir.string() << '\n';
        } else if (an_cmd->parsed()) {
            const auto table = analytic_curve(curve, ao);
            if (an_out.empty())
                out << table.to_string();
            else
                write_csv(an_out, table);
        } else if (pl_cmd->parsed()) {
            ps.kind = parse_plot_kind(kind);
            if (o_guide->count()) ps.guide_slope = guide;
            write_plot(ps);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kOk;
}

}  // namespace nhrmt::cli
