#include "nhrmt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "json_convert.hpp"
#include "nhrmt/archive.hpp"
#include "nhrmt/csv.hpp"
#include "nhrmt/eigensolve.hpp"

namespace nhrmt {

using json = nlohmann::json;

std::string to_string(UnfoldPolicy p) {
    switch (p) {
        case UnfoldPolicy::NONE: return "none";
        case UnfoldPolicy::EDGE_ONLY: return "edge_only";
        case UnfoldPolicy::EDGE_AND_POISSON_BULK: return "edge_and_poisson_bulk";
    }
    return "?";
}

UnfoldPolicy parse_unfold_policy(const std::string& name) {
    if (name == "none") return UnfoldPolicy::NONE;
    if (name == "edge_only") return UnfoldPolicy::EDGE_ONLY;
    if (name == "edge_and_poisson_bulk") return UnfoldPolicy::EDGE_AND_POISSON_BULK;
    throw ConfigError("unknown unfold policy '" + name + "'");
}

std::string to_string(SecondPass p) {
    switch (p) {
        case SecondPass::AUTO: return "auto";
        case SecondPass::MEMORY: return "memory";
        case SecondPass::REPLAY: return "replay";
        case SecondPass::ARCHIVE: return "archive";
    }
    return "?";
}

SecondPass parse_second_pass(const std::string& name) {
    if (name == "auto") return SecondPass::AUTO;
    if (name == "memory") return SecondPass::MEMORY;
    if (name == "replay") return SecondPass::REPLAY;
    if (name == "archive") return SecondPass::ARCHIVE;
    throw ConfigError("unknown second pass mode '" + name + "'");
}

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
    ensemble.validate();
    // AII-dagger spectra collapse to n points; every point needs two neighbours.
    if (ensemble.n < 3) throw ConfigError("n must be >= 3 for nearest and next-nearest neighbours");
    if (samples < 1) throw ConfigError("samples must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (bounds) bounds->validate();
    if (binning.ratio_grid < 1 || binning.marginal_bins < 1 || binning.spacing_bins < 1 || !(binning.spacing_max > 0.0))
        throw ConfigError("binning: counts must be positive and spacing_max > 0");
    if (radial_bins < 1000) throw ConfigError("radial_bins must be >= 1000");
    if (!(radial_max > 0.0)) throw ConfigError("radial_max must be positive");
    if (radial_output_bins < 1 || radial_output_bins > radial_bins)
        throw ConfigError("radial_output_bins must lie in [1, radial_bins]");
    if (second_pass == SecondPass::ARCHIVE && output_dir.empty() && archive_path.empty())
        throw ConfigError("archive mode needs output_dir or archive_path");
    if (checkpoint_every > 0 && output_dir.empty()) throw ConfigError("checkpoints need output_dir");
}

RegionBounds ExperimentConfig::effective_bounds() const {
    return bounds ? *bounds : RegionBounds::defaults(ensemble.n_effective());
}

unsigned ExperimentConfig::effective_workers() const {
    if (const char* env = std::getenv("NHRMT_WORKERS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096) throw ConfigError(std::string("NHRMT_WORKERS: invalid value '") + env + "'");
        return static_cast<unsigned>(v);
    }
    return workers;
}

std::filesystem::path ExperimentConfig::effective_archive_path() const {
    return archive_path.empty() ? output_dir / "eigenvalues.bin" : archive_path;
}

namespace {

json binning_to_json(const StatBinning& b) {
    return {{"ratio_grid", b.ratio_grid},
            {"marginal_bins", b.marginal_bins},
            {"spacing_bins", b.spacing_bins},
            {"spacing_max", b.spacing_max}};
}

json bounds_to_json(const RegionBounds& b) {
    return {{"r_bulk", b.r_bulk}, {"r_edge", b.r_edge}, {"r_edge_ext", b.r_edge_ext}, {"n_effective", b.n_effective}};
}

// Fields that determine the statistics; a checkpoint must match them.
json science_json(const ExperimentConfig& c) {
    json j = detail::ensemble_to_json(c.ensemble);
    j["samples"] = c.samples;
    j["bounds"] = bounds_to_json(c.effective_bounds());
    j["unfold_policy"] = to_string(c.unfold_policy);
    j["binning"] = binning_to_json(c.binning);
    j["radial_bins"] = c.radial_bins;
    j["radial_max"] = c.radial_max;
    return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c) {
    json j = detail::ensemble_to_json(c.ensemble);
    j["samples"] = c.samples;
    j["bounds"] = c.bounds ? bounds_to_json(*c.bounds) : json(nullptr);
    j["unfold_policy"] = to_string(c.unfold_policy);
    j["workers"] = c.workers;
    j["checkpoint_every"] = c.checkpoint_every;
    j["output_dir"] = c.output_dir.string();
    j["resume"] = c.resume;
    j["second_pass"] = to_string(c.second_pass);
    j["archive_path"] = c.archive_path.string();
    j["memory_limit_points"] = c.memory_limit_points;
    j["binning"] = binning_to_json(c.binning);
    j["radial_bins"] = c.radial_bins;
    j["radial_max"] = c.radial_max;
    j["radial_output_bins"] = c.radial_output_bins;
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config: not a JSON object");
    static const char* known[] = {"ensemble",    "n",          "tau",           "seed",          "samples",
                                  "bounds",      "unfold_policy", "workers",    "checkpoint_every", "output_dir",
                                  "resume",      "second_pass", "archive_path", "memory_limit_points", "binning",
                                  "radial_bins", "radial_max", "radial_output_bins"};
    for (const auto& item : j.items())
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return item.key() == k; }) ==
            std::end(known))
            throw ConfigError("config: unknown key '" + item.key() + "'");
    ExperimentConfig c;
    c.ensemble = detail::ensemble_from_json(j);
    try {
        c.samples = j.value("samples", c.samples);
        if (j.contains("bounds") && !j["bounds"].is_null()) {
            const auto& b = j["bounds"];
            RegionBounds rb = RegionBounds::defaults(c.ensemble.n_effective());
            rb.r_bulk = b.value("r_bulk", rb.r_bulk);
            rb.r_edge = b.value("r_edge", rb.r_edge);
            rb.r_edge_ext = b.value("r_edge_ext", rb.r_edge_ext);
            c.bounds = rb;
        }
        if (j.contains("unfold_policy")) c.unfold_policy = parse_unfold_policy(j["unfold_policy"].get<std::string>());
        c.workers = j.value("workers", c.workers);
        c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
        c.output_dir = j.value("output_dir", std::string{});
        c.resume = j.value("resume", c.resume);
        if (j.contains("second_pass")) c.second_pass = parse_second_pass(j["second_pass"].get<std::string>());
        c.archive_path = j.value("archive_path", std::string{});
        c.memory_limit_points = j.value("memory_limit_points", c.memory_limit_points);
        if (j.contains("binning")) {
            const auto& b = j["binning"];
            c.binning.ratio_grid = b.value("ratio_grid", c.binning.ratio_grid);
            c.binning.marginal_bins = b.value("marginal_bins", c.binning.marginal_bins);
            c.binning.spacing_bins = b.value("spacing_bins", c.binning.spacing_bins);
            c.binning.spacing_max = b.value("spacing_max", c.binning.spacing_max);
        }
        c.radial_bins = j.value("radial_bins", c.radial_bins);
        c.radial_max = j.value("radial_max", c.radial_max);
        c.radial_output_bins = j.value("radial_output_bins", c.radial_output_bins);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

const StatAccumulator& ExperimentResult::region(Region r) const {
    switch (r) {
        case Region::BULK: return bulk;
        case Region::EDGE: return edge;
        case Region::EDGE_EXT: return edge_ext;
        case Region::NEITHER: break;
    }
    throw ConfigError("no accumulator for region 'neither'");
}

// ---------------------------------------------------------------- per sample

Spectrum produce_spectrum(const EnsembleSpec& ensemble, std::uint64_t sample_index) {
    EnsembleSpec spec = ensemble;
    spec.sample_index = sample_index;
    if (spec.cls == EnsembleClass::POISSON_GAUSS) return sample_poisson(spec);
    Spectrum s;
    s.spec = spec;
    s.eigenvalues = eigenvalues(sample_matrix(spec)).eigenvalues;
    if (spec.cls == EnsembleClass::AII_DAG) return collapse_degeneracy(s);
    return s;
}

SpectrumSamples analyze_spectrum(std::span<const std::complex<double>> points, const RegionBounds& bounds,
                                 const UnfoldingMap* map, UnfoldPolicy policy, bool poisson) {
    SpectrumSamples out;
    out.ratios.reserve(points.size());
    out.spacings.reserve(points.size());
    const NeighborIndex index(points);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const RatioSample r = make_ratio(points, k, index.query(k), bounds);
        SpacingSample s;
        s.region = r.region;
        s.s_nn = s.s_nn_unfolded = r.nn_dist;
        s.s_nnn = s.s_nnn_unfolded = r.nnn_dist;
        const bool unfold = (policy != UnfoldPolicy::NONE && in_edge_ext(r.region)) ||
                            (policy == UnfoldPolicy::EDGE_AND_POISSON_BULK && poisson && r.region == Region::BULK);
        if (unfold) {
            if (!map) throw ConfigError("analyze_spectrum: unfolding requested without a density map");
            s.s_nn_unfolded = map->unfold(points[k], r.nn_dist);
            s.s_nnn_unfolded = map->unfold(points[k], r.nnn_dist);
        }
        out.ratios.push_back(r);
        out.spacings.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------- run

namespace {

constexpr std::uint64_t kBlock = 8;

struct Partial {
    StatAccumulator bulk, edge, edge_ext;
    std::uint64_t points = 0, neither = 0;

    explicit Partial(const StatBinning& b) : bulk(b), edge(b), edge_ext(b) {}

    void merge(const Partial& o) {
        bulk.merge(o.bulk);
        edge.merge(o.edge);
        edge_ext.merge(o.edge_ext);
        points += o.points;
        neither += o.neither;
    }

    void add(std::uint64_t index, const SpectrumSamples& s) {
        std::vector<RatioSample> rb, re, rx;
        std::vector<SpacingSample> sb, se, sx;
        for (std::size_t k = 0; k < s.ratios.size(); ++k) {
            switch (s.ratios[k].region) {
                case Region::BULK:
                    rb.push_back(s.ratios[k]);
                    sb.push_back(s.spacings[k]);
                    break;
                case Region::EDGE:
                    re.push_back(s.ratios[k]);
                    se.push_back(s.spacings[k]);
                    [[fallthrough]];
                case Region::EDGE_EXT:
                    rx.push_back(s.ratios[k]);
                    sx.push_back(s.spacings[k]);
                    break;
                case Region::NEITHER: ++neither; break;
            }
        }
        points += s.ratios.size();
        bulk.add_spectrum_ratios(index, rb);
        bulk.add_spacings(index, sb);
        edge.add_spectrum_ratios(index, re);
        edge.add_spacings(index, se);
        edge_ext.add_spectrum_ratios(index, rx);
        edge_ext.add_spacings(index, sx);
    }
};

// Runs body(worker) on each worker thread; rethrows the first failure.
void run_workers(unsigned workers, const std::function<void(unsigned, const std::atomic<bool>&)>& body) {
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex m;
    auto guarded = [&](unsigned w) {
        try {
            body(w, failed);
        } catch (...) {
            std::lock_guard lock(m);
            if (!first) first = std::current_exception();
            failed = true;
        }
    };
    if (workers == 1) {
        guarded(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(guarded, w);
        for (auto& t : pool) t.join();
    }
    if (first) std::rethrow_exception(first);
}

template <class Fn>
auto tag_sample(std::uint64_t index, Fn&& fn) {
    try {
        return fn();
    } catch (const SampleError&) {
        throw;
    } catch (const std::exception& ex) {
        throw SampleError(ex.what(), index);
    }
}

json accumulator_to_json(const StatAccumulator& a) {
    json batches = json::array();
    for (const auto& b : a.batches()) batches.push_back({b.sample_index, b.count, b.sum, b.sum_sq});
    std::vector<std::uint64_t> idx;
    std::vector<double> nn, nnn, nnu, nnnu;
    for (const auto& s : a.spacings()) {
        idx.push_back(s.sample_index);
        nn.push_back(s.s_nn);
        nnn.push_back(s.s_nnn);
        nnu.push_back(s.s_nn_used);
        nnnu.push_back(s.s_nnn_used);
    }
    return {{"hist2d", a.ratio_hist2d()},
            {"radial", a.radial_counts()},
            {"angular", a.angular_counts()},
            {"batches", batches},
            {"spacings", {{"index", idx}, {"nn", nn}, {"nnn", nnn}, {"nn_used", nnu}, {"nnn_used", nnnu}}}};
}

StatAccumulator accumulator_from_json(const json& j, const StatBinning& binning) {
    std::vector<RatioBatch> batches;
    for (const auto& b : j.at("batches")) {
        RatioBatch r;
        r.sample_index = b.at(0).get<std::uint64_t>();
        r.count = b.at(1).get<std::uint64_t>();
        r.sum = b.at(2).get<std::array<double, kMomentCount>>();
        r.sum_sq = b.at(3).get<std::array<double, kMomentCount>>();
        batches.push_back(r);
    }
    const auto& s = j.at("spacings");
    const auto idx = s.at("index").get<std::vector<std::uint64_t>>();
    const auto nn = s.at("nn").get<std::vector<double>>();
    const auto nnn = s.at("nnn").get<std::vector<double>>();
    const auto nnu = s.at("nn_used").get<std::vector<double>>();
    const auto nnnu = s.at("nnn_used").get<std::vector<double>>();
    if (nn.size() != idx.size() || nnn.size() != idx.size() || nnu.size() != idx.size() || nnnu.size() != idx.size())
        throw IoError("checkpoint: ragged spacing arrays");
    std::vector<SpacingRecord> spacings(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) spacings[i] = {idx[i], nn[i], nnn[i], nnu[i], nnnu[i]};
    return StatAccumulator::from_parts(binning, j.at("hist2d").get<std::vector<std::uint64_t>>(),
                                       j.at("radial").get<std::vector<std::uint64_t>>(),
                                       j.at("angular").get<std::vector<std::uint64_t>>(), std::move(batches),
                                       std::move(spacings));
}

struct Checkpoint {
    int pass = 1;
    std::uint64_t done = 0;  // samples finished in this pass
    RadialHistogram radial;
    std::optional<Partial> stats;  // pass 2 only
};

std::filesystem::path checkpoint_path(const ExperimentConfig& c) { return c.output_dir / "checkpoint.cbor"; }

void save_checkpoint(const ExperimentConfig& c, const Checkpoint& cp) {
    json j{{"config", science_json(c)},
           {"pass", cp.pass},
           {"done", cp.done},
           {"radial", {{"counts", cp.radial.counts()}, {"overflow", cp.radial.overflow()}}}};
    if (cp.stats) {
        j["bulk"] = accumulator_to_json(cp.stats->bulk);
        j["edge"] = accumulator_to_json(cp.stats->edge);
        j["edge_ext"] = accumulator_to_json(cp.stats->edge_ext);
        j["points"] = cp.stats->points;
        j["neither"] = cp.stats->neither;
    }
    const auto bytes = json::to_cbor(j);
    const auto path = checkpoint_path(c);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::optional<Checkpoint> load_checkpoint(const ExperimentConfig& c) {
    const auto path = checkpoint_path(c);
    if (c.output_dir.empty() || !std::filesystem::exists(path)) return std::nullopt;
    std::ifstream in(path, std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const json j = json::from_cbor(bytes, true, false);
    if (j.is_discarded()) throw IoError("checkpoint is not valid CBOR: " + path.string());
    if (j.at("config") != science_json(c))
        throw ConfigError("checkpoint " + path.string() + " belongs to a different configuration");
    Checkpoint cp;
    try {
        cp.pass = j.at("pass").get<int>();
        cp.done = j.at("done").get<std::uint64_t>();
        cp.radial = RadialHistogram::from_counts(j.at("radial").at("counts").get<std::vector<std::uint64_t>>(),
                                                 c.radial_max, j.at("radial").at("overflow").get<std::uint64_t>());
        if (cp.pass == 2) {
            Partial p(c.binning);
            p.bulk = accumulator_from_json(j.at("bulk"), c.binning);
            p.edge = accumulator_from_json(j.at("edge"), c.binning);
            p.edge_ext = accumulator_from_json(j.at("edge_ext"), c.binning);
            p.points = j.at("points").get<std::uint64_t>();
            p.neither = j.at("neither").get<std::uint64_t>();
            cp.stats = std::move(p);
        }
    } catch (const json::exception& ex) {
        throw IoError(std::string("checkpoint: ") + ex.what());
    }
    return cp;
}

// Writes spectra to the archive in sample order as workers finish them.
class OrderedArchive {
public:
    OrderedArchive(const std::filesystem::path& path, const ExperimentConfig& c)
        : writer_(path, c.ensemble, config_to_json(c)) {}
    void put(std::uint64_t index, Spectrum s) {
        std::lock_guard lock(m_);
        pending_.emplace(index, std::move(s));
        while (!pending_.empty() && pending_.begin()->first == next_) {
            writer_.append(pending_.begin()->second);
            pending_.erase(pending_.begin());
            ++next_;
        }
    }
    void close() { writer_.close(); }

private:
    std::mutex m_;
    ArchiveWriter writer_;
    std::map<std::uint64_t, Spectrum> pending_;
    std::uint64_t next_ = 0;
};

}  // namespace

ExperimentResult run(const ExperimentConfig& cfg, const RunControl& control) {
    cfg.validate();
    const unsigned workers = cfg.effective_workers();
    const RegionBounds bounds = cfg.effective_bounds();
    const bool poisson = cfg.ensemble.cls == EnsembleClass::POISSON_GAUSS;
    const std::uint64_t chunk = cfg.checkpoint_every > 0 ? cfg.checkpoint_every : cfg.samples;
    if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);

    std::optional<Checkpoint> resumed;
    if (cfg.resume && cfg.checkpoint_every > 0) resumed = load_checkpoint(cfg);

    SecondPass mode = cfg.second_pass;
    if (mode == SecondPass::AUTO) {
        const std::uint64_t pts = cfg.samples * static_cast<std::uint64_t>(cfg.ensemble.n);
        mode = pts <= cfg.memory_limit_points ? SecondPass::MEMORY : SecondPass::REPLAY;
    }

    RadialHistogram radial(cfg.radial_bins, cfg.radial_max);
    std::uint64_t pass1_done = 0;
    if (resumed) {
        radial = resumed->radial;
        pass1_done = resumed->pass == 1 ? resumed->done : cfg.samples;
    }
    // A resumed first pass cannot refill the in-memory store or continue a
    // half-written archive.
    if (mode == SecondPass::MEMORY && pass1_done > 0 && pass1_done < cfg.samples) mode = SecondPass::REPLAY;
    if (mode == SecondPass::MEMORY && pass1_done == cfg.samples) mode = SecondPass::REPLAY;
    if (mode == SecondPass::ARCHIVE && resumed && resumed->pass == 1) {
        radial = RadialHistogram(cfg.radial_bins, cfg.radial_max);
        pass1_done = 0;
    }

    std::vector<Spectrum> store;
    if (mode == SecondPass::MEMORY) store.resize(cfg.samples);
    std::unique_ptr<OrderedArchive> archive;
    if (mode == SecondPass::ARCHIVE && pass1_done < cfg.samples)
        archive = std::make_unique<OrderedArchive>(cfg.effective_archive_path(), cfg);

    // Pass 1: the radial density of all samples.
    while (pass1_done < cfg.samples) {
        const std::uint64_t end = std::min(cfg.samples, pass1_done + chunk);
        std::vector<RadialHistogram> local(workers, RadialHistogram(cfg.radial_bins, cfg.radial_max));
        std::atomic<std::uint64_t> next{pass1_done};
        run_workers(workers, [&](unsigned w, const std::atomic<bool>& failed) {
            while (!failed) {
                const std::uint64_t b = next.fetch_add(kBlock);
                if (b >= end) break;
                for (std::uint64_t i = b; i < std::min(end, b + kBlock); ++i) {
                    Spectrum s = tag_sample(i, [&] { return produce_spectrum(cfg.ensemble, i); });
                    local[w].add(s.eigenvalues);
                    if (archive)
                        archive->put(i, std::move(s));
                    else if (mode == SecondPass::MEMORY)
                        store[i] = std::move(s);
                }
            }
        });
        for (const auto& h : local) radial.merge(h);
        pass1_done = end;
        if (cfg.checkpoint_every > 0) save_checkpoint(cfg, {1, pass1_done, radial, std::nullopt});
        if (control.stop && control.stop(1, pass1_done)) throw RunInterrupted("run stopped after pass 1 chunk");
    }
    if (archive) archive->close();

    // Pass 2: ratios and spacings with the unfolding map of the full density.
    const UnfoldingMap map(radial);
    Partial total(cfg.binning);
    std::uint64_t pass2_done = 0;
    if (resumed && resumed->pass == 2) {
        total = *resumed->stats;
        pass2_done = resumed->done;
    }
    std::unique_ptr<ArchiveReader> reader;
    std::mutex reader_mutex;
    std::uint64_t reader_pos = 0;
    if (mode == SecondPass::ARCHIVE) {
        reader = std::make_unique<ArchiveReader>(cfg.effective_archive_path());
        if (reader->header().samples != cfg.samples)
            throw CorruptArchiveError("archive sample count does not match the configuration", 0);
        for (; reader_pos < pass2_done; ++reader_pos) reader->next();
    }
    while (pass2_done < cfg.samples) {
        const std::uint64_t end = std::min(cfg.samples, pass2_done + chunk);
        std::vector<Partial> local(workers, Partial(cfg.binning));
        std::atomic<std::uint64_t> next{pass2_done};
        run_workers(workers, [&](unsigned w, const std::atomic<bool>& failed) {
            std::vector<std::pair<std::uint64_t, Spectrum>> batch;
            while (!failed) {
                batch.clear();
                if (reader) {
                    // Block assignment and reading happen together so that
                    // sample indices follow file order.
                    std::lock_guard lock(reader_mutex);
                    if (reader_pos >= end) break;
                    for (; reader_pos < std::min(end, next.load() + kBlock); ++reader_pos) {
                        auto s = reader->next();
                        if (!s) throw CorruptArchiveError("archive ended early", 0);
                        batch.emplace_back(reader_pos, std::move(*s));
                    }
                    next = reader_pos;
                } else {
                    const std::uint64_t b = next.fetch_add(kBlock);
                    if (b >= end) break;
                    for (std::uint64_t i = b; i < std::min(end, b + kBlock); ++i) {
                        if (mode == SecondPass::MEMORY)
                            batch.emplace_back(i, std::move(store[i]));
                        else
                            batch.emplace_back(i, tag_sample(i, [&] { return produce_spectrum(cfg.ensemble, i); }));
                    }
                }
                for (auto& [i, s] : batch) {
                    const auto samples = tag_sample(
                        i, [&] { return analyze_spectrum(s.eigenvalues, bounds, &map, cfg.unfold_policy, poisson); });
                    local[w].add(i, samples);
                    s.eigenvalues = {};
                }
            }
        });
        for (const auto& p : local) total.merge(p);
        pass2_done = end;
        if (cfg.checkpoint_every > 0) save_checkpoint(cfg, {2, pass2_done, radial, total});
        if (control.stop && control.stop(2, pass2_done)) throw RunInterrupted("run stopped after pass 2 chunk");
    }

    ExperimentResult r{std::move(total.bulk), std::move(total.edge), std::move(total.edge_ext), std::move(radial),
                       bounds, cfg.samples, total.points, total.neither};
    r.bulk.canonicalize();
    r.edge.canonicalize();
    r.edge_ext.canonicalize();
    return r;
}

// ---------------------------------------------------------------- outputs

namespace {

constexpr Region kRegions[] = {Region::BULK, Region::EDGE, Region::EDGE_EXT};

json moments_json(const StatAccumulator& acc) {
    json j{{"count", acc.ratio_count()}, {"spacings", acc.spacing_count()}};
    try {
        const auto m = moments(acc);
        j["spectra"] = m.spectra;
        for (int k = 0; k < kMomentCount; ++k) {
            const auto key = moment_key(static_cast<Moment>(k));
            j[key] = {{"mean", m.values[k].mean}, {"stderr", m.values[k].stderr_}};
        }
    } catch (const InsufficientDataError&) {
        j["insufficient_data"] = true;
    }
    return j;
}

std::vector<std::string> row(std::initializer_list<std::string> cells) { return cells; }

}  // namespace

void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto f = format_double;

    // Only fields that shape the results, so artifacts do not depend on workers or paths.
    json config = science_json(cfg);
    config["radial_output_bins"] = cfg.radial_output_bins;
    json mj{{"config", config},
            {"bounds", bounds_to_json(result.bounds)},
            {"samples", result.samples},
            {"total_points", result.total_points},
            {"neither", result.neither}};
    for (Region r : kRegions) mj["regions"][to_string(r)] = moments_json(result.region(r));
    write_text_file(dir / "moments.json", mj.dump(2) + "\n");

    CsvTable marg{{"region", "marginal", "center", "density", "stderr"}, {}};
    CsvTable r2d{{"region", "x", "y", "density"}, {}};
    CsvTable sp{{"region", "series", "center", "density", "stderr"}, {}};
    for (Region reg : kRegions) {
        const auto& acc = result.region(reg);
        const std::string name = to_string(reg);
        try {
            const auto [rad, ang] = marginals(acc);
            for (std::size_t i = 0; i < rad.centers.size(); ++i)
                marg.rows.push_back(row({name, "radial", f(rad.centers[i]), f(rad.density[i]), f(rad.stderr_[i])}));
            for (std::size_t i = 0; i < ang.centers.size(); ++i)
                marg.rows.push_back(row({name, "angular", f(ang.centers[i]), f(ang.density[i]), f(ang.stderr_[i])}));
        } catch (const InsufficientDataError&) {
        }
        if (acc.ratio_count() > 0) {
            const auto h = ratio_density(acc);
            for (std::size_t iy = 0; iy < h.y_centers.size(); ++iy)
                for (std::size_t ix = 0; ix < h.x_centers.size(); ++ix)
                    r2d.rows.push_back(row({name, f(h.x_centers[ix]), f(h.y_centers[iy]),
                                            f(h.density[iy * h.x_centers.size() + ix])}));
        }
        try {
            const auto h = spacing_histograms(acc, true);
            for (const auto& [series, hist] : {std::pair{"nn", &h.nn}, std::pair{"nnn", &h.nnn}})
                for (std::size_t i = 0; i < hist->centers.size(); ++i)
                    sp.rows.push_back(
                        row({name, series, f(hist->centers[i]), f(hist->density[i]), f(hist->stderr_[i])}));
            // Empirical CDF of the normalized NN spacing on a log grid.
            const auto v = sorted_nn(acc, true);
            const double n = static_cast<double>(v.size());
            constexpr int kCdfPoints = 81;
            for (int i = 0; i < kCdfPoints; ++i) {
                const double s = std::pow(10.0, -3.0 + 3.6 * i / (kCdfPoints - 1.0));
                const double c = static_cast<double>(std::upper_bound(v.begin(), v.end(), s) - v.begin()) / n;
                sp.rows.push_back(row({name, "nn_cdf", f(s), f(c), f(std::sqrt(c * (1.0 - c) / n))}));
            }
        } catch (const InsufficientDataError&) {
        }
    }
    write_csv(dir / "marginals.csv", marg);
    write_csv(dir / "ratio2d.csv", r2d);
    write_csv(dir / "spacing.csv", sp);

    CsvTable rd{{"r", "density", "stderr", "count"}, {}};
    const auto& h = result.radial;
    const std::size_t fine = h.bins(), coarse = cfg.radial_output_bins;
    const double total = static_cast<double>(h.total());
    for (std::size_t c = 0; c < coarse && total > 0; ++c) {
        const std::size_t lo = c * fine / coarse, hi = (c + 1) * fine / coarse;
        std::uint64_t cnt = 0;
        for (std::size_t b = lo; b < hi; ++b) cnt += h.counts()[b];
        const double r0 = lo * h.bin_width(), r1 = hi * h.bin_width();
        const double area = std::numbers::pi * (r1 * r1 - r0 * r0);
        const double d = static_cast<double>(cnt);
        rd.rows.push_back(row({f(0.5 * (r0 + r1)), f(d / (total * area)), f(std::sqrt(d) / (total * area)),
                               std::to_string(cnt)}));
    }
    write_csv(dir / "radial_density.csv", rd);
}

}  // namespace nhrmt
