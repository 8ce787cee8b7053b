#include "nhrmt/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>
#include <string>

#include "nhrmt/errors.hpp"

namespace nhrmt {

double integrate(const std::function<double(double)>& f, double a, double b, const QuadOptions& opt) {
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, opt.max_depth,
                                                                                   opt.rel_tol, &err, &l1);
    if (!std::isfinite(v)) throw ConvergenceError("integrate: non-finite result");
    if (err > opt.rel_tol * l1 && err > opt.abs_tol)
{
        std::ostringstream msg;
        msg << "integrate: error estimate " << err << " exceeds tolerance on [" << a << ", " << b << "]";
        throw ConvergenceError(msg.str());
    }
    return v;
}

double integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& points,
                        const QuadOptions& opt) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        if (points[i + 1] > points[i]) sum += integrate(f, points[i], points[i + 1], opt);
    return sum;
}

}  // namespace nhrmt
