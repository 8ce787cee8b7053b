#include "plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "nhrmt/csv.hpp"

namespace nhrmt::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
constexpr std::array<const char*, 6> kPalette = {"#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

// Fixed-precision, locale-free number text.
std::string num(double v, int precision = 2) {
    if (std::abs(v) < 0.5 * std::pow(10.0, -precision)) v = 0.0;
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

std::string tick_label(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
    return std::string(buf, res.ptr);
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Series {
    std::vector<double> x, y;
    std::string label;
};

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;
    double map(double v, double p0, double p1) const {
        const double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi;
        const double t = ((log ? std::log10(v) : v) - a) / (b - a);
        return p0 + t * (p1 - p0);
    }
};

class Canvas {
public:
    Canvas(Axis x, Axis y, const std::string& title, const std::string& xlabel, const std::string& ylabel)
        : x_(x), y_(y) {
        os_ << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")" << kHeight
            << R"(" viewBox="0 0 )" << kWidth << ' ' << kHeight << R"(">)" << '\n';
        os_ << R"(<rect x="0" y="0" width=")" << kWidth << R"(" height=")" << kHeight << R"(" fill="white"/>)"
            << '\n';
        if (!title.empty())
            os_ << R"(<text x=")" << num(kWidth / 2) << R"(" y="24" text-anchor="middle" font-size="16">)"
                << escape(title) << "</text>\n";
        os_ << R"(<text x=")" << num(kLeft + (kWidth - kLeft - kRight) / 2) << R"(" y=")" << num(kHeight - 10)
            << R"(" text-anchor="middle" font-size="13">)" << escape(xlabel) << "</text>\n";
        os_ << R"(<text x="16" y=")" << num(kTop + (kHeight - kTop - kBottom) / 2)
            << R"(" text-anchor="middle" font-size="13" transform="rotate(-90 16 )"
            << num(kTop + (kHeight - kTop - kBottom) / 2) << R"lit()">)lit" << escape(ylabel) << "</text>\n";
    }

    double px(double v) const { return x_.map(v, kLeft, kWidth - kRight); }
    double py(double v) const { return y_.map(v, kHeight - kBottom, kTop); }
    bool inside(double x, double y) const {
        auto ok = [](const Axis& a, double v) {
            return std::isfinite(v) && v >= a.lo && v <= a.hi && (!a.log || v > 0);
        };
        return ok(x_, x) && ok(y_, y);
    }

    void axes() {
        os_ << R"(<g id="axes" stroke="black" fill="none">)" << '\n';
        os_ << R"(<rect x=")" << num(kLeft) << R"(" y=")" << num(kTop) << R"(" width=")"
            << num(kWidth - kLeft - kRight) << R"(" height=")" << num(kHeight - kTop - kBottom) << R"("/>)" << '\n';
        os_ << "</g>\n<g id=\"ticks\" font-size=\"11\">\n";
        for (double t : ticks(x_)) {
            const double p = px(t);
            os_ << R"(<line x1=")" << num(p) << R"(" y1=")" << num(kHeight - kBottom) << R"(" x2=")" << num(p)
                << R"(" y2=")" << num(kHeight - kBottom + 5) << R"(" stroke="black"/>)";
            os_ << R"(<text x=")" << num(p) << R"(" y=")" << num(kHeight - kBottom + 18)
                << R"(" text-anchor="middle">)" << tick_label(t) << "</text>\n";
        }
        for (double t : ticks(y_)) {
            const double p = py(t);
            os_ << R"(<line x1=")" << num(kLeft - 5) << R"(" y1=")" << num(p) << R"(" x2=")" << num(kLeft)
                << R"(" y2=")" << num(p) << R"(" stroke="black"/>)";
            os_ << R"(<text x=")" << num(kLeft - 8) << R"(" y=")" << num(p + 4) << R"(" text-anchor="end">)"
                << tick_label(t) << "</text>\n";
        }
        os_ << "</g>\n";
    }

    void polyline(const Series& s, const std::string& id, const std::string& color, bool dashed = false) {
        os_ << "<g class=\"layer\" id=\"" << escape(id) << "\">\n";
        os_ << R"(<polyline fill="none" stroke=")" << color << R"(" stroke-width="1.5")"
            << (dashed ? R"( stroke-dasharray="6 4")" : "") << R"( points=")";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!inside(s.x[i], s.y[i])) continue;
            os_ << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
            first = false;
        }
        os_ << R"("/>)" << '\n' << "</g>\n";
    }

    void heatmap(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& v,
                 double dx, double dy) {
        const double vmax = *std::max_element(v.begin(), v.end());
        os_ << "<g class=\"layer\" id=\"data\" stroke=\"none\">\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0) || vmax <= 0) continue;
            const double t = std::clamp(v[i] / vmax, 0.0, 1.0);
            const int level = static_cast<int>(std::lround(255 * (1 - t)));
            const double x0 = px(xs[i] - dx / 2), x1 = px(xs[i] + dx / 2);
            const double y0 = py(ys[i] + dy / 2), y1 = py(ys[i] - dy / 2);
            os_ << R"(<rect x=")" << num(x0) << R"(" y=")" << num(y0) << R"(" width=")" << num(x1 - x0 + 0.01)
                << R"(" height=")" << num(y1 - y0 + 0.01) << R"(" fill="rgb()" << level << ',' << level << ",255)\"/>\n";
        }
        os_ << "</g>\n";
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
        os_ << "<g id=\"legend\" font-size=\"12\">\n";
        double y = kTop + 16;
        for (const auto& [label, color] : entries) {
            const double x = kWidth - kRight - 170;
            os_ << R"(<line x1=")" << num(x) << R"(" y1=")" << num(y - 4) << R"(" x2=")" << num(x + 24)
                << R"(" y2=")" << num(y - 4) << R"(" stroke=")" << color << R"(" stroke-width="2"/>)";
            os_ << R"(<text x=")" << num(x + 30) << R"(" y=")" << num(y) << "\">" << escape(label) << "</text>\n";
            y += 16;
        }
        os_ << "</g>\n";
    }

    std::string finish() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    Axis x_, y_;
    std::ostringstream os_;

    static std::vector<double> ticks(const Axis& a) {
        std::vector<double> t;
        if (a.log) {
            for (int e = static_cast<int>(std::floor(std::log10(a.lo))); e <= std::ceil(std::log10(a.hi)); ++e) {
                const double v = std::pow(10.0, e);
                if (v >= a.lo * (1 - 1e-12) && v <= a.hi * (1 + 1e-12)) t.push_back(v);
            }
            return t;
        }
        const double span = a.hi - a.lo;
        const double raw = span / 5;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        const double step = raw / mag < 1.5 ? mag : raw / mag < 3.5 ? 2 * mag : raw / mag < 7.5 ? 5 * mag : 10 * mag;
        for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * span; v += step)
            t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
        return t;
    }
};

CsvTable load(const fs::path& p) { return read_csv(p); }

int require(const CsvTable& t, const fs::path& file, const std::string& col) {
    const int c = t.column(col);
    if (c < 0) throw MissingColumnError(file, col);
    return c;
}

// Rows matching every (column, value) filter, as numeric (x, y).
Series select(const CsvTable& t, const fs::path& file, const std::string& xcol, const std::string& ycol,
              const std::vector<std::pair<std::string, std::string>>& filters) {
    const int cx = require(t, file, xcol), cy = require(t, file, ycol);
    std::vector<std::pair<int, std::string>> f;
    for (const auto& [col, val] : filters) f.emplace_back(require(t, file, col), val);
    Series s;
    for (const auto& row : t.rows) {
        if (!std::all_of(f.begin(), f.end(), [&](const auto& fv) { return row[fv.first] == fv.second; })) continue;
        s.x.push_back(parse_double(row[cx]));
        s.y.push_back(parse_double(row[cy]));
    }
    if (s.x.empty()) throw IoError("no rows selected from " + file.string());
    return s;
}

// First two columns of an analytic curve file.
Series curve(const fs::path& file) {
    const auto t = load(file);
    if (t.header.size() < 2) throw MissingColumnError(file, "value");
    Series s = select(t, file, t.header[0], t.header[1], {});
    s.label = file.stem().string() + ": " + t.header[1];
    return s;
}

Axis fit_axis(const std::vector<const Series*>& all, bool use_x, bool log, bool from_zero) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* s : all)
        for (double v : use_x ? s->x : s->y)
            if (std::isfinite(v) && (!log || v > 0)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (!std::isfinite(lo)) throw IoError("no finite data to plot");
    if (log) {
        lo = std::pow(10.0, std::floor(std::log10(lo)));
        hi = std::pow(10.0, std::ceil(std::log10(hi)));
        if (hi <= lo) hi = lo * 10;
        return {lo, hi, true};
    }
    if (from_zero) lo = std::min(lo, 0.0);
    if (hi <= lo) hi = lo + 1;
    const double pad = use_x ? 0.0 : 0.05 * (hi - lo);
    return {lo, hi + pad, false};
}

std::string render_lines(const PlotSpec& spec, Series data, std::vector<Series> overlays, const std::string& xlabel,
                         const std::string& ylabel, bool logx, bool logy) {
    std::vector<const Series*> all{&data};
    Axis x = fit_axis(all, true, logx, false);
    Axis y = fit_axis(all, false, logy, !logy);
    Canvas c(x, y, spec.title, xlabel, ylabel);
    c.axes();
    std::vector<std::pair<std::string, std::string>> legend{{data.label, "#1f77b4"}};
    c.polyline(data, "data", "#1f77b4");
    for (std::size_t i = 0; i < overlays.size(); ++i) {
        const std::string color = kPalette[i % kPalette.size()];
        c.polyline(overlays[i], "overlay-" + std::to_string(i), color, true);
        legend.emplace_back(overlays[i].label, color);
    }
    if (spec.guide_slope) {
        // Reference power law through the first plotted data point.
        std::size_t k = 0;
        while (k < data.x.size() && !(data.x[k] > 0 && data.y[k] > 0)) ++k;
        if (k < data.x.size() && x.log) {
            // Sampled densely so that clipping to the y range keeps the visible part.
            Series fine;
            for (int i = 0; i <= 200; ++i) {
                const double xv = x.lo * std::pow(x.hi / x.lo, i / 200.0);
                fine.x.push_back(xv);
                fine.y.push_back(data.y[k] * std::pow(xv / data.x[k], *spec.guide_slope));
            }
            c.polyline(fine, "guide", "#7f7f7f", true);
            legend.emplace_back("slope " + tick_label(*spec.guide_slope), "#7f7f7f");
        }
    }
    c.legend(legend);
    return c.finish();
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
    if (name == "ratio-2d") return PlotKind::RATIO_DENSITY_2D;
    if (name == "marginal") return PlotKind::MARGINAL;
    if (name == "spacing") return PlotKind::SPACING;
    if (name == "small-s") return PlotKind::SMALL_S_LOGLOG;
    if (name == "radial") return PlotKind::DENSITY_RADIAL;
    if (name == "overlay") return PlotKind::ANALYTIC_OVERLAY;
    throw ConfigError("unknown plot kind '" + name + "'");
}

std::string to_string(PlotKind k) {
    switch (k) {
        case PlotKind::RATIO_DENSITY_2D: return "ratio-2d";
        case PlotKind::MARGINAL: return "marginal";
        case PlotKind::SPACING: return "spacing";
        case PlotKind::SMALL_S_LOGLOG: return "small-s";
        case PlotKind::DENSITY_RADIAL: return "radial";
        case PlotKind::ANALYTIC_OVERLAY: return "overlay";
    }
    return "?";
}

void PlotSpec::validate() const {
    if (inputs.empty()) throw ConfigError("plot needs at least one input file");
    for (const auto& p : inputs)
        if (!fs::exists(p)) throw IoError("input file does not exist: " + p.string());
    if (out.empty()) throw ConfigError("plot needs an output path");
    if (series != "nn" && series != "nnn") throw ConfigError("series must be nn or nnn");
    if (marginal != "radial" && marginal != "angular") throw ConfigError("marginal must be radial or angular");
}

std::string render_plot(const PlotSpec& spec) {
    spec.validate();
    const fs::path& main = spec.inputs.front();
    std::vector<Series> overlays;
    for (std::size_t i = 1; i < spec.inputs.size(); ++i) overlays.push_back(curve(spec.inputs[i]));

    switch (spec.kind) {
        case PlotKind::RATIO_DENSITY_2D: {
            const auto t = load(main);
            const int cx = require(t, main, "x"), cy = require(t, main, "y"), cd = require(t, main, "density");
            const int cr = t.column("region");
            std::vector<double> xs, ys, v;
            for (const auto& row : t.rows) {
                if (cr >= 0 && row[cr] != spec.region) continue;
                xs.push_back(parse_double(row[cx]));
                ys.push_back(parse_double(row[cy]));
                v.push_back(parse_double(row[cd]));
            }
            if (v.empty()) throw IoError("no rows selected from " + main.string());
            // Grid spacing from the distinct coordinates.
            auto spacing = [](std::vector<double> u) {
                std::sort(u.begin(), u.end());
                u.erase(std::unique(u.begin(), u.end()), u.end());
                return u.size() > 1 ? (u.back() - u.front()) / static_cast<double>(u.size() - 1) : 1.0;
            };
            const double dx = spacing(xs), dy = spacing(ys);
            Canvas c({-1, 1}, {-1, 1}, spec.title, "Re z", "Im z");
            c.heatmap(xs, ys, v, dx, dy);
            c.axes();
            return c.finish();
        }
        case PlotKind::MARGINAL: {
            const auto t = load(main);
            Series s = select(t, main, "center", "density", {{"region", spec.region}, {"marginal", spec.marginal}});
            s.label = spec.region + " " + spec.marginal;
            return render_lines(spec, s, overlays, spec.marginal == "radial" ? "r" : "phi", "density", false, false);
        }
        case PlotKind::SPACING: {
            const auto t = load(main);
            Series s = select(t, main, "center", "density", {{"region", spec.region}, {"series", spec.series}});
            s.label = spec.region + " " + spec.series;
            return render_lines(spec, s, overlays, "s", "p(s)", false, false);
        }
        case PlotKind::SMALL_S_LOGLOG: {
            const auto t = load(main);
            Series s = select(t, main, "center", "density", {{"region", spec.region}, {"series", "nn_cdf"}});
            s.label = spec.region + " cumulative nn";
            return render_lines(spec, s, overlays, "s", "F(s)", true, true);
        }
        case PlotKind::DENSITY_RADIAL: {
            const auto t = load(main);
            Series s = select(t, main, "r", "density", {});
            s.label = "radial density";
            return render_lines(spec, s, overlays, "r", "R(r)", false, false);
        }
        case PlotKind::ANALYTIC_OVERLAY: {
            Series first = curve(main);
            const auto t = load(main);
            return render_lines(spec, first, overlays, t.header[0], t.header[1], false, false);
        }
    }
    throw ConfigError("unhandled plot kind");
}

void write_plot(const PlotSpec& spec) { write_text_file(spec.out, render_plot(spec)); }

}  // namespace nhrmt::cli
