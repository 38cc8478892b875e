#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "stand/stand.hpp"

namespace fixtures {

/// Preset used across the suites: q = 1.6, A = 0.01, n_min = 200, e_max = 250,
/// V = 5 exp(-0.02 t), h0 = 30 t / (t + 40), s(0) = 0.02, n(0) = 1500.
inline stand::Scenario preset(stand::GrowthFunction g, double v0 = 5.0) {
    stand::Scenario sc;
    sc.params = {1.6, 0.01, 200.0, 250.0, 150.0};
    sc.growth = g;
    sc.env = stand::Environment(stand::Exponential{v0, 0.02}, stand::Saturating{30.0, 40.0});
    sc.initial = {0.0, 0.02, 1500.0};
    sc.validate();
    return sc;
}

inline stand::Scenario power(double theta, double v0 = 5.0) {
    return preset(stand::GrowthFunction::power(theta), v0);
}
inline stand::Scenario fagacees(double p = 3.0) {
    return preset(stand::GrowthFunction::fagacees(p));
}
inline stand::Scenario linear(double v0 = 5.0) { return preset(stand::GrowthFunction::linear(), v0); }

/// Composite Simpson on [a, b] with m (even) panels; independent of the library quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int m = 20000) {
    if (m % 2)
        ++m;
    const double h = (b - a) / m;
    double acc = f(a) + f(b);
    for (int i = 1; i < m; ++i)
        acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

/// Plain bisection root of an increasing function; independent of the library root finder.
inline double root(const std::function<double(double)>& f, double lo, double hi) {
    for (int i = 0; i < 300 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace fixtures
