// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "errors.hpp"

namespace stand::numerics {

inline constexpr double kTimeTol = 1e-9;
inline constexpr int kMaxBisection = 200;
inline constexpr double kQuadratureRelTol = 1e-10;

/// Adaptive tanh-sinh quadrature on [a, b]; tolerates integrable endpoint
/// singularities.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = kQuadratureRelTol) {
    if (a == b)
        return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    return rule.integrate(f, a, b, rel_tol);
}

/// Bisection on a bracket [lo, hi] with f(lo) and f(hi) of opposite sign
/// (or zero). Returns the midpoint of the final bracket.
template <class F>
double bisect(F&& f, double lo, double hi, double tol = kTimeTol, int max_iter = kMaxBisection) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw DomainError("bisect: root not bracketed");
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0)
            return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Root of a nondecreasing function f on [lo, limit]: the bracket is grown by
/// doubling from lo until f changes sign. Empty when f(limit) < 0.
template <class F>
std::optional<double> increasing_root(F&& f, double lo, double limit, double tol = kTimeTol) {
    if (f(lo) >= 0.0)
        return lo;
    if (f(limit) < 0.0)
        return std::nullopt;
    double width = std::max((limit - lo) * 1e-6, tol);
    double a = lo;
    double b = std::min(lo + width, limit);
    while (f(b) < 0.0) {
        a = b;
        width *= 2.0;
        b = std::min(lo + width, limit);
    }
    return bisect(f, a, b, tol);
}

/// Nonuniform Simpson rule over two adjacent intervals of widths h1, h2.
inline double simpson_pair(double h1, double h2, double f0, double f1, double f2) {
    const double h = h1 + h2;
    return h / 6.0 *
           ((2.0 - h2 / h1) * f0 + h * h / (h1 * h2) * f1 + (2.0 - h1 / h2) * f2);
}

} // namespace stand::numerics
