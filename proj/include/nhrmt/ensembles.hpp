#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nhrmt {

enum class EnsembleClass { A, EGINUE, AI_DAG, AII_DAG, POISSON_GAUSS };

std::string to_string(EnsembleClass c);
// Accepts the CLI spellings a, eginue, ai, aii, poisson.
EnsembleClass parse_ensemble(const std::string& name);

struct EnsembleSpec {
    EnsembleClass cls = EnsembleClass::A;
    int n = 2;                   // N; AII_DAG matrices are 2N x 2N
    std::optional<double> tau;   // EGINUE only
    std::uint64_t seed = 0;
    std::uint64_t sample_index = 0;

    void validate() const;
    int dimension() const { return cls == EnsembleClass::AII_DAG ? 2 * n : n; }
    // Size that sets the edge width: 2N for AII_DAG.
    int n_effective() const { return dimension(); }
};

struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;
    EnsembleSpec spec;
    bool degeneracy_collapsed = false;
};

// Per-sample generator; the stream depends only on (seed, sample_index).
class SampleRng {
public:
    SampleRng(std::uint64_t seed, std::uint64_t sample_index);
    double uniform();  // [0,1) with 53 random bits
    // A pair of independent standard normals (polar transform).
    std::pair<double, double> normal_pair();
    // Complex normal with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance);

private:
    std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x);

Eigen::MatrixXcd sample_matrix(const EnsembleSpec& spec);
Spectrum sample_poisson(const EnsembleSpec& spec);
// 2 sigma^2 = -r^2 / log(1 - r^2) with r = 1 - 1/sqrt(N)
double poisson_two_sigma_squared(int n);

Spectrum collapse_degeneracy(const Spectrum& spectrum, double tol = 1e-8);

// The block matrix Sigma = [[0, -i 1], [i 1, 0]] of size 2N.
Eigen::MatrixXcd self_dual_sigma(int n);

}  // namespace nhrmt
