#pragma once

#include <cmath>
#include <complex>

namespace nhrmt::detail {

// lgamma for positive arguments without touching the global signgam.
inline double lgamma_pos(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

// Neumaier-compensated running sum for real or complex values.
template <class T>
class NeumaierSum {
public:
    void add(T x) {
        if constexpr (std::is_same_v<T, double>) {
            add_part(sum_, comp_, x);
        } else {
            double sr = sum_.real(), cr = comp_.real();
            double si = sum_.imag(), ci = comp_.imag();
            add_part(sr, cr, x.real());
            add_part(si, ci, x.imag());
            sum_ = {sr, si};
            comp_ = {cr, ci};
        }
    }
    T value() const { return sum_ + comp_; }

private:
    static void add_part(double& s, double& c, double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    T sum_{};
    T comp_{};
};

}  // namespace nhrmt::detail
