#include "nhrmt/ensembles.hpp"

#include <cmath>
#include <limits>

#include "nhrmt/errors.hpp"

namespace nhrmt {

std::string to_string(EnsembleClass c) {
    switch (c) {
        case EnsembleClass::A: return "a";
        case EnsembleClass::EGINUE: return "eginue";
        case EnsembleClass::AI_DAG: return "ai";
        case EnsembleClass::AII_DAG: return "aii";
        case EnsembleClass::POISSON_GAUSS: return "poisson";
    }
    return "?";
}

EnsembleClass parse_ensemble(const std::string& name) {
    if (name == "a" || name == "A") return EnsembleClass::A;
    if (name == "eginue" || name == "EGINUE") return EnsembleClass::EGINUE;
    if (name == "ai" || name == "AI_DAG") return EnsembleClass::AI_DAG;
    if (name == "aii" || name == "AII_DAG") return EnsembleClass::AII_DAG;
    if (name == "poisson" || name == "POISSON_GAUSS") return EnsembleClass::POISSON_GAUSS;
    throw ConfigError("unknown ensemble '" + name + "'");
}

void EnsembleSpec::validate() const {
    if (n < 2) throw ConfigError("ensemble size n must be >= 2");
    if (cls == EnsembleClass::EGINUE) {
        if (!tau) throw ConfigError("eginue requires tau");
        if (!(*tau >= 0.0 && *tau < 1.0)) throw ConfigError("tau must lie in [0,1)");
    } else if (tau) {
        throw ConfigError("tau is only meaningful for eginue");
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t sample_index) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(sample_index));
    std::uint32_t words[8];
    for (auto& w : words) {
        s = splitmix64(s);
        w = static_cast<std::uint32_t>(s >> 32);
    }
    std::seed_seq seq(std::begin(words), std::end(words));
    return std::mt19937_64(seq);
}

}  // namespace

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t sample_index)
    : eng_(make_engine(seed, sample_index)) {}

double SampleRng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

std::pair<double, double> SampleRng::normal_pair() {
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    return {u * f, v * f};
}

std::complex<double> SampleRng::complex_normal(double variance) {
    auto [a, b] = normal_pair();
    double sd = std::sqrt(variance / 2.0);
    return {a * sd, b * sd};
}

Eigen::MatrixXcd self_dual_sigma(int n) {
    using cd = std::complex<double>;
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        s(i, n + i) = cd{0.0, -1.0};
        s(n + i, i) = cd{0.0, 1.0};
    }
    return s;
}

namespace {

Eigen::MatrixXcd ginibre(SampleRng& rng, int n, double variance) {
    Eigen::MatrixXcd g(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = rng.complex_normal(variance);
    return g;
}

}  // namespace

Eigen::MatrixXcd sample_matrix(const EnsembleSpec& spec) {
    spec.validate();
    SampleRng rng(spec.seed, spec.sample_index);
    const int n = spec.n;
    switch (spec.cls) {
        case EnsembleClass::A:
            return ginibre(rng, n, 1.0 / n);
        case EnsembleClass::EGINUE: {
            // sqrt((1+t)/2) H1 + i sqrt((1-t)/2) H2 with H1 = (G+G^†)/sqrt2,
            // H2 = (G-G^†)/(i sqrt2) collapses to alpha G + beta G^†; at t = 0
            // alpha = 1, beta = 0 exactly, so the class-A matrix is reproduced bit for bit.
            Eigen::MatrixXcd g = ginibre(rng, n, 1.0 / n);
            const double t = *spec.tau;
            const double alpha = 0.5 * (std::sqrt(1.0 + t) + std::sqrt(1.0 - t));
            const double beta = 0.5 * (std::sqrt(1.0 + t) - std::sqrt(1.0 - t));
            Eigen::MatrixXcd gd = g.adjoint();
            return alpha * g + beta * gd;
        }
        case EnsembleClass::AI_DAG: {
            Eigen::MatrixXcd g = ginibre(rng, n, 1.0 / n);
            Eigen::MatrixXcd j(n, n);
            const double r = 1.0 / std::sqrt(2.0);
            for (int c = 0; c < n; ++c)
                for (int i = 0; i <= c; ++i) {
                    std::complex<double> v = (g(i, c) + g(c, i)) * r;
                    j(i, c) = v;
                    j(c, i) = v;
                }
            return j;
        }
        case EnsembleClass::AII_DAG: {
            const double var = 1.0 / (2.0 * n);
            Eigen::MatrixXcd a = ginibre(rng, n, var);
            Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
            Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n);
            for (auto* m : {&b, &c})
                for (int col = 1; col < n; ++col)
                    for (int i = 0; i < col; ++i) {
                        std::complex<double> v = rng.complex_normal(var);
                        (*m)(i, col) = v;
                        (*m)(col, i) = -v;
                    }
            Eigen::MatrixXcd j(2 * n, 2 * n);
            j.topLeftCorner(n, n) = a;
            j.topRightCorner(n, n) = b;
            j.bottomLeftCorner(n, n) = c;
            j.bottomRightCorner(n, n) = a.transpose();
            return j;
        }
        case EnsembleClass::POISSON_GAUSS:
            break;
    }
    throw ConfigError("sample_matrix: POISSON_GAUSS has no matrix; use sample_poisson");
}

double poisson_two_sigma_squared(int n) {
    const double r = 1.0 - 1.0 / std::sqrt(static_cast<double>(n));
    return -r * r / std::log1p(-r * r);
}

Spectrum sample_poisson(const EnsembleSpec& spec) {
    spec.validate();
    if (spec.cls != EnsembleClass::POISSON_GAUSS)
        throw ConfigError("sample_poisson requires the poisson ensemble");
    SampleRng rng(spec.seed, spec.sample_index);
    const double variance = poisson_two_sigma_squared(spec.n);
    Spectrum out;
    out.spec = spec;
    out.eigenvalues.reserve(spec.n);
    for (int i = 0; i < spec.n; ++i) out.eigenvalues.push_back(rng.complex_normal(variance));
    return out;
}

Spectrum collapse_degeneracy(const Spectrum& spectrum, double tol) {
    const auto& ev = spectrum.eigenvalues;
    const std::size_t m = ev.size();
    if (m % 2 != 0) throw PairingError("collapse_degeneracy: odd number of eigenvalues");
    if (spectrum.spec.cls != EnsembleClass::AII_DAG)
        throw ConfigError("collapse_degeneracy applies to the aii ensemble only");
    double scale = 0.0;
    for (auto z : ev) scale += std::abs(z);
    scale = m ? scale / m : 0.0;
    if (scale == 0.0) scale = 1.0;
    const double limit = tol * scale;

    std::vector<char> used(m, 0);
    Spectrum out;
    out.spec = spectrum.spec;
    out.degeneracy_collapsed = true;
    out.eigenvalues.reserve(m / 2);
    for (std::size_t i = 0; i < m; ++i) {
        if (used[i]) continue;
        used[i] = 1;
        std::size_t best = m;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (used[j]) continue;
            double d = std::abs(ev[j] - ev[i]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == m || best_d > limit)
            throw PairingError("collapse_degeneracy: eigenvalue " + std::to_string(i) +
                               " has no partner within tolerance (distance " + std::to_string(best_d) + ")");
        used[best] = 1;
        out.eigenvalues.push_back(0.5 * (ev[i] + ev[best]));
    }
    return out;
}

}  // namespace nhrmt
