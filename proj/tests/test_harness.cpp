#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "nhrmt/archive.hpp"
#include "nhrmt/csv.hpp"
#include "nhrmt/errors.hpp"
#include "nhrmt/harness.hpp"

using namespace nhrmt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("nhrmt_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig small_config(EnsembleClass cls, int n, std::uint64_t samples) {
    ExperimentConfig c;
    c.ensemble.cls = cls;
    c.ensemble.n = n;
    c.ensemble.seed = 11;
    if (cls == EnsembleClass::EGINUE) c.ensemble.tau = 0.5;
    c.samples = samples;
    c.radial_bins = 4096;
    c.radial_output_bins = 64;
    c.binning.ratio_grid = 20;
    c.binning.marginal_bins = 10;
    c.binning.spacing_bins = 20;
    return c;
}

std::uint64_t ratio_total(const ExperimentResult& r) {
    return r.bulk.ratio_count() + r.edge_ext.ratio_count() + r.neither;
}

std::vector<Spectrum> some_spectra() {
    std::vector<Spectrum> out;
    EnsembleSpec spec;
    spec.cls = EnsembleClass::A;
    spec.n = 12;
    spec.seed = 5;
    for (std::uint64_t i = 0; i < 4; ++i) out.push_back(produce_spectrum(spec, i));
    return out;
}

}  // namespace

TEST_CASE("archive round trip is bit exact") {
    TempDir dir("archive");
    const auto spectra = some_spectra();
    const auto path = dir.path / "a.bin";
    save_archive(spectra, path, R"({"note":"x"})");
    const auto back = load_archive(path);
    REQUIRE(back.size() == spectra.size());
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        REQUIRE(back[i].eigenvalues.size() == spectra[i].eigenvalues.size());
        CHECK(std::memcmp(back[i].eigenvalues.data(), spectra[i].eigenvalues.data(),
                          spectra[i].eigenvalues.size() * sizeof(std::complex<double>)) == 0);
        CHECK(back[i].spec.sample_index == i);
    }
    const auto h = read_archive_header(path);
    CHECK(h.samples == 4);
    CHECK(h.points == 48);
    CHECK(h.version == kArchiveVersion);

    // Header line is standalone JSON.
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::getline(in, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j["endianness"] == "little");
    CHECK(j["samples"] == 4);
}

TEST_CASE("archive with zero samples loads as an empty list") {
    TempDir dir("archive0");
    const auto path = dir.path / "e.bin";
    save_archive({}, path);
    CHECK(load_archive(path).empty());
    CHECK(read_archive_header(path).samples == 0);
}

TEST_CASE("truncated archive reports the byte offset") {
    TempDir dir("archivetrunc");
    const auto path = dir.path / "t.bin";
    save_archive(some_spectra(), path);
    const auto size = fs::file_size(path);
    for (std::uintmax_t cut : {size - 1, size - 16, size - 200}) {
        fs::resize_file(path, cut);
        try {
            load_archive(path);
            FAIL("expected CorruptArchiveError");
        } catch (const CorruptArchiveError& e) {
            CHECK(e.offset > 0);
            CHECK(e.offset <= cut);
        }
        save_archive(some_spectra(), path);
    }
    // Trailing garbage and a bad header are both rejected.
    {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        out << "junk";
    }
    CHECK_THROWS_AS(load_archive(path), CorruptArchiveError);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "not json\n";
    }
    CHECK_THROWS_AS(load_archive(path), CorruptArchiveError);
    CHECK_THROWS_AS(load_archive(dir.path / "missing.bin"), IoError);
}

TEST_CASE("count conservation for one Poisson sample") {
    auto cfg = small_config(EnsembleClass::POISSON_GAUSS, 16, 1);
    const auto r = run(cfg);
    CHECK(r.total_points == 16);
    CHECK(ratio_total(r) == 16);
    CHECK(r.bulk.spacing_count() == r.bulk.ratio_count());
    CHECK(r.edge_ext.spacing_count() == r.edge_ext.ratio_count());
    CHECK(r.edge.ratio_count() <= r.edge_ext.ratio_count());
    CHECK(r.radial.total() == 16);
}

TEST_CASE("count conservation over ensembles") {
    for (auto cls : {EnsembleClass::A, EnsembleClass::EGINUE, EnsembleClass::AI_DAG, EnsembleClass::AII_DAG}) {
        CAPTURE(static_cast<int>(cls));
        const auto r = run(small_config(cls, 24, 6));
        // Class AII-dagger spectra are collapsed to one point per Kramers pair.
        CHECK(r.total_points == 6 * 24);
        CHECK(ratio_total(r) == r.total_points);
        CHECK(r.radial.total() == r.total_points);
    }
}

TEST_CASE("runs are deterministic and independent of the worker count") {
    auto cfg = small_config(EnsembleClass::A, 32, 40);
    cfg.workers = 1;
    const auto base = run(cfg);
    CHECK(run(cfg) == base);
    for (unsigned w : {4u, 8u}) {
        cfg.workers = w;
        CHECK(run(cfg) == base);
    }
}

TEST_CASE("second pass sources agree") {
    TempDir dir("passes");
    auto cfg = small_config(EnsembleClass::POISSON_GAUSS, 40, 20);
    cfg.workers = 3;
    cfg.second_pass = SecondPass::REPLAY;
    const auto replay = run(cfg);
    cfg.second_pass = SecondPass::MEMORY;
    CHECK(run(cfg) == replay);
    cfg.second_pass = SecondPass::ARCHIVE;
    cfg.output_dir = dir.path;
    CHECK(run(cfg) == replay);
    const auto spectra = load_archive(cfg.effective_archive_path());
    REQUIRE(spectra.size() == 20);
    for (std::uint64_t i = 0; i < 20; ++i)
        CHECK(spectra[i].eigenvalues == produce_spectrum(cfg.ensemble, i).eigenvalues);
    cfg.second_pass = SecondPass::AUTO;
    cfg.memory_limit_points = 10;
    CHECK(run(cfg) == replay);
}

TEST_CASE("interrupted runs resume to the same result") {
    auto cfg = small_config(EnsembleClass::A, 24, 30);
    const auto reference = run(cfg);
    for (auto mode : {SecondPass::REPLAY, SecondPass::MEMORY, SecondPass::ARCHIVE}) {
        for (int stop_pass : {1, 2}) {
            CAPTURE(to_string(mode));
            CAPTURE(stop_pass);
            TempDir dir("resume");
            auto c = cfg;
            c.output_dir = dir.path;
            c.checkpoint_every = 8;
            c.second_pass = mode;
            c.workers = 2;
            RunControl stop{[&](int pass, std::uint64_t done) { return pass == stop_pass && done == 16; }};
            CHECK_THROWS_AS(run(c, stop), RunInterrupted);
            CHECK(fs::exists(dir.path / "checkpoint.cbor"));
            CHECK(run(c) == reference);
        }
    }
}

TEST_CASE("checkpoints from another configuration are rejected") {
    TempDir dir("mismatch");
    auto cfg = small_config(EnsembleClass::A, 24, 16);
    cfg.output_dir = dir.path;
    cfg.checkpoint_every = 8;
    RunControl stop{[](int, std::uint64_t) { return true; }};
    CHECK_THROWS_AS(run(cfg, stop), RunInterrupted);
    auto other = cfg;
    other.ensemble.seed = 12;
    CHECK_THROWS_AS(run(other), ConfigError);
    other.resume = false;
    CHECK_NOTHROW(run(other));
}

TEST_CASE("config validation") {
    auto cfg = small_config(EnsembleClass::A, 24, 1);
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.samples = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.workers = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.ensemble.n = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.radial_bins = 999;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.checkpoint_every = 5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.ensemble.cls = EnsembleClass::EGINUE;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config JSON round trip") {
    auto cfg = small_config(EnsembleClass::EGINUE, 64, 123);
    cfg.bounds = RegionBounds::defaults(64);
    cfg.bounds->r_bulk = 0.4;
    cfg.unfold_policy = UnfoldPolicy::EDGE_ONLY;
    cfg.workers = 3;
    cfg.checkpoint_every = 10;
    cfg.output_dir = "/tmp/x";
    cfg.second_pass = SecondPass::ARCHIVE;
    const auto back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(back.ensemble.tau == 0.5);
    CHECK(back.bounds->r_bulk == 0.4);
    CHECK(back.unfold_policy == UnfoldPolicy::EDGE_ONLY);
    CHECK(back.second_pass == SecondPass::ARCHIVE);

    CHECK_THROWS_AS(config_from_json("[1]"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"ensemble":"a","n":8,"typo":1})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"ensemble":"eginue","n":8})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"ensemble":"a","n":8,"samples":"many"})"), ConfigError);
    const auto minimal = config_from_json(R"({"ensemble":"poisson","n":8,"seed":3})");
    CHECK(minimal.ensemble.cls == EnsembleClass::POISSON_GAUSS);
    CHECK(minimal.samples == 1);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), IoError);
}

TEST_CASE("worker count environment override") {
    ExperimentConfig cfg;
    cfg.workers = 2;
    ::setenv("NHRMT_WORKERS", "5", 1);
    CHECK(cfg.effective_workers() == 5);
    ::setenv("NHRMT_WORKERS", "zero", 1);
    CHECK_THROWS_AS(cfg.effective_workers(), ConfigError);
    ::unsetenv("NHRMT_WORKERS");
    CHECK(cfg.effective_workers() == 2);
}

TEST_CASE("unfolding policy selects which distances are rescaled") {
    auto cfg = small_config(EnsembleClass::POISSON_GAUSS, 64, 4);
    const auto spectrum = produce_spectrum(cfg.ensemble, 0);
    RadialHistogram hist(cfg.radial_bins, cfg.radial_max);
    hist.add(spectrum.eigenvalues);
    const UnfoldingMap map(hist);
    const auto bounds = cfg.effective_bounds();
    const auto none = analyze_spectrum(spectrum.eigenvalues, bounds, nullptr, UnfoldPolicy::NONE, true);
    const auto edge = analyze_spectrum(spectrum.eigenvalues, bounds, &map, UnfoldPolicy::EDGE_ONLY, true);
    const auto both = analyze_spectrum(spectrum.eigenvalues, bounds, &map, UnfoldPolicy::EDGE_AND_POISSON_BULK, true);
    const auto nonp = analyze_spectrum(spectrum.eigenvalues, bounds, &map, UnfoldPolicy::EDGE_AND_POISSON_BULK, false);
    for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k) {
        const auto reg = none.spacings[k].region;
        CHECK(none.spacings[k].s_nn_unfolded == none.spacings[k].s_nn);
        CHECK(edge.spacings[k].s_nn == none.spacings[k].s_nn);
        const double unfolded = map.unfold(spectrum.eigenvalues[k], none.spacings[k].s_nn);
        CHECK(edge.spacings[k].s_nn_unfolded == (in_edge_ext(reg) ? unfolded : none.spacings[k].s_nn));
        CHECK(both.spacings[k].s_nn_unfolded ==
              (reg == Region::NEITHER ? none.spacings[k].s_nn : unfolded));
        CHECK(nonp.spacings[k].s_nn_unfolded == edge.spacings[k].s_nn_unfolded);
    }
    CHECK_THROWS_AS(analyze_spectrum(spectrum.eigenvalues, bounds, nullptr, UnfoldPolicy::EDGE_ONLY, true),
                    ConfigError);
}

TEST_CASE("outputs are written with headers") {
    TempDir dir("outputs");
    auto cfg = small_config(EnsembleClass::POISSON_GAUSS, 64, 10);
    const auto r = run(cfg);
    write_outputs(r, cfg, dir.path);
    for (const char* f : {"moments.json", "marginals.csv", "ratio2d.csv", "spacing.csv", "radial_density.csv"})
        CHECK(fs::exists(dir.path / f));
    std::ifstream in(dir.path / "moments.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["regions"]["bulk"]["r"]["mean"].is_number());
    CHECK(j["total_points"] == 640);
    const auto rd = read_csv(dir.path / "radial_density.csv");
    CHECK(rd.header == std::vector<std::string>{"r", "density", "stderr", "count"});
    CHECK(rd.rows.size() == 64);
    double mass = 0;
    std::uint64_t count = 0;
    const double w = cfg.radial_max / 64;
    for (const auto& row : rd.rows) {
        const double rr = parse_double(row[0]);
        mass += parse_double(row[1]) * 2 * std::numbers::pi * rr * w;
        count += std::stoull(row[3]);
    }
    CHECK(count + r.radial.overflow() == 640);
    CHECK(mass == doctest::Approx(1.0).epsilon(0.02));
    const auto sp = read_csv(dir.path / "spacing.csv");
    CHECK(sp.header == std::vector<std::string>{"region", "series", "center", "density", "stderr"});
}
