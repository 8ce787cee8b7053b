#pragma once

#include <functional>
#include <vector>

namespace nhrmt {

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    unsigned max_depth = 15;
};

// Adaptive 61-point Gauss-Kronrod; infinite limits allowed. Throws
// ConvergenceError when the error estimate misses both tolerances.
double integrate(const std::function<double(double)>& f, double a, double b, const QuadOptions& opt = {});

// Sum over consecutive subintervals [p0,p1], [p1,p2], ...
double integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& points,
                        const QuadOptions& opt = {});

}  // namespace nhrmt
