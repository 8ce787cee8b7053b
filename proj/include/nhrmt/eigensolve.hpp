#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace nhrmt {

struct EigenReport {
    std::vector<std::complex<double>> eigenvalues;
    double max_residual = 0.0;  // only filled when eigenvectors are requested
    std::string backend_tag;
};

// All eigenvalues of a dense square complex matrix (LAPACK zgeev).
EigenReport eigenvalues(const Eigen::MatrixXcd& j);
// Same, also computing right eigenvectors for a residual spot check.
EigenReport eigenvalues_checked(const Eigen::MatrixXcd& j);

}  // namespace nhrmt
