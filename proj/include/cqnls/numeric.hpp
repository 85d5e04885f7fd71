// Small numeric utilities shared across modules.
#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace cqnls {

// Golden-section search for the maximizer of a unimodal f on [lo, hi].
// Returns {argmax, max}. Used to certify the variational constants
// (25/216 and 25/108) instead of trusting hardcoded values.
template <class F>
std::pair<double, double> golden_section_max(F&& f, double lo, double hi, double xtol = 1e-12) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > xtol) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

} // namespace cqnls
