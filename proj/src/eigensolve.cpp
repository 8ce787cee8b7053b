#include "nhrmt/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "nhrmt/errors.hpp"

extern "C" {
void zgeev_(const char* jobvl, const char* jobvr, const int* n, std::complex<double>* a, const int* lda,
            std::complex<double>* w, std::complex<double>* vl, const int* ldvl, std::complex<double>* vr,
            const int* ldvr, std::complex<double>* work, const int* lwork, double* rwork, int* info);
#ifdef NHRMT_HAVE_OPENBLAS
void openblas_set_num_threads(int);
#endif
}

namespace nhrmt {

namespace {

// Concurrency comes from running samples in parallel; keep each solve
// single-threaded so results do not depend on the BLAS thread count.
void pin_blas_threads() {
#ifdef NHRMT_HAVE_OPENBLAS
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
#endif
}

EigenReport solve(const Eigen::MatrixXcd& j, bool vectors) {
    if (j.rows() != j.cols()) throw DomainError("eigenvalues: matrix must be square");
    if (j.rows() < 1) throw DomainError("eigenvalues: empty matrix");
    if (!j.allFinite()) throw DomainError("eigenvalues: non-finite matrix entry");
    pin_blas_threads();

    const int n = static_cast<int>(j.rows());
    Eigen::MatrixXcd a = j;
    std::vector<std::complex<double>> w(n);
    std::vector<double> rwork(2 * n);
    Eigen::MatrixXcd vr;
    const char jobvl = 'N';
    const char jobvr = vectors ? 'V' : 'N';
    if (vectors) vr.resize(n, n);
    const int ldv = vectors ? n : 1;
    std::complex<double> dummy;
    std::complex<double>* vr_ptr = vectors ? vr.data() : &dummy;
    int info = 0;
    int lwork = -1;
    std::complex<double> query;
    zgeev_(&jobvl, &jobvr, &n, a.data(), &n, w.data(), &dummy, &ldv, vr_ptr, &ldv, &query, &lwork,
           rwork.data(), &info);
    lwork = std::max(1, static_cast<int>(query.real()));
    std::vector<std::complex<double>> work(lwork);
    zgeev_(&jobvl, &jobvr, &n, a.data(), &n, w.data(), &dummy, &ldv, vr_ptr, &ldv, work.data(), &lwork,
           rwork.data(), &info);
    if (info > 0) throw ConvergenceError("eigenvalues: QR iteration failed to converge");
    if (info < 0) throw DomainError("eigenvalues: invalid argument " + std::to_string(-info) + " to zgeev");

    EigenReport rep;
    rep.eigenvalues = std::move(w);
    rep.backend_tag = "lapack-zgeev";
    if (vectors) {
        const double fro = j.norm();
        double worst = 0.0;
        for (int k = 0; k < n; ++k) {
            Eigen::VectorXcd v = vr.col(k);
            double res = (j * v - rep.eigenvalues[k] * v).norm() / (fro > 0 ? fro : 1.0);
            worst = std::max(worst, res);
        }
        rep.max_residual = worst;
    }
    return rep;
}

}  // namespace

EigenReport eigenvalues(const Eigen::MatrixXcd& j) { return solve(j, false); }
EigenReport eigenvalues_checked(const Eigen::MatrixXcd& j) { return solve(j, true); }

}  // namespace nhrmt
