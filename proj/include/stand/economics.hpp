// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "dynamics.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace stand {

/// Net unit price P(s,t) = k s^alpha h0(t) exp(-delta t).
struct EconomicModel {
    double k = 1.0;
    double alpha = 1.0;
    double delta = 0.0;

    void validate() const {
        if (!(k > 0.0))
            throw DomainError("economics.k must be > 0");
        if (!(alpha > 0.0))
            throw DomainError("economics.alpha must be > 0");
        if (!(delta >= 0.0))
            throw DomainError("economics.delta must be >= 0");
    }
};

inline double price(const EconomicModel& m, const Environment& env, double s, double t) {
    if (!(s > 0.0) || !(t >= 0.0))
        throw DomainError("price: require s > 0 and t >= 0");
    return m.k * std::pow(s, m.alpha) * env.h0(t) * std::exp(-m.delta * t);
}

/// dP/ds at fixed t.
inline double price_ds(const EconomicModel& m, const Environment& env, double s, double t) {
    return m.alpha * m.k * std::pow(s, m.alpha - 1.0) * env.h0(t) * std::exp(-m.delta * t);
}

/// dP/dt at fixed s, i.e. -delta_h(t) P(s,t), written without the 1/h0 factor
/// so it stays finite at t = 0.
inline double price_dt(const EconomicModel& m, const Environment& env, double s, double t) {
    return m.k * std::pow(s, m.alpha) * (env.h0_prime(t) - m.delta * env.h0(t)) *
           std::exp(-m.delta * t);
}

/// Effective discount delta - h0'(t)/h0(t).
inline double delta_h(const EconomicModel& m, const Environment& env, double t) {
    const double h = env.h0(t);
    if (!(h > 0.0))
        throw DomainError("delta_h: h0(t) vanishes at t = " + std::to_string(t));
    return m.delta - env.h0_prime(t) / h;
}

namespace detail {

/// Integrate f over the trajectory grid: nonuniform Simpson on pairs of steps
/// whose shared sample has a continuous control, trapezoid elsewhere.
/// f(sample, use_left_control) evaluates the integrand at a sample.
template <class F>
double grid_quadrature(const Trajectory& tr, F&& f) {
    const auto& x = tr.samples;
    double total = 0.0;
    std::size_t i = 0;
    while (i + 1 < x.size()) {
        const bool pair_ok = i + 2 < x.size() && x[i + 1].e == x[i + 1].e_left &&
                             x[i + 1].t > x[i].t && x[i + 2].t > x[i + 1].t;
        if (pair_ok) {
            total += numerics::simpson_pair(x[i + 1].t - x[i].t, x[i + 2].t - x[i + 1].t,
                                            f(x[i], false), f(x[i + 1], false), f(x[i + 2], true));
            i += 2;
        } else {
            total += 0.5 * (x[i + 1].t - x[i].t) * (f(x[i], false) + f(x[i + 1], true));
            i += 1;
        }
    }
    return total;
}

} // namespace detail

/// Harvest value: integral of P(s,t) e(t) plus the terminal clear-cut
/// P(s(T),T) n(T) at the last sample.
inline double objective(const Scenario& sc, const EconomicModel& m, const Trajectory& tr) {
    m.validate();
    if (tr.samples.empty())
        throw DomainError("objective: empty trajectory");
    const double integral = detail::grid_quadrature(tr, [&](const Sample& x, bool left) {
        return price(m, sc.env, x.s, x.t) * (left ? x.e_left : x.e);
    });
    const auto& last = tr.samples.back();
    return integral + price(m, sc.env, last.s, last.t) * last.n;
}

/// The same value after integrating by parts:
///   integral of (dP/dt) n  +  P(s(0),0) n(0),
/// with (dP/dt) n = P_s g(r) V + P_t n.
inline double objective_ibp(const Scenario& sc, const EconomicModel& m, const Trajectory& tr) {
    m.validate();
    if (tr.samples.empty())
        throw DomainError("objective_ibp: empty trajectory");
    const double integral = detail::grid_quadrature(tr, [&](const Sample& x, bool) {
        const double growth = sc.growth.value(x.r) * sc.env.V(x.t);
        return price_ds(m, sc.env, x.s, x.t) * growth + price_dt(m, sc.env, x.s, x.t) * x.n;
    });
    const auto& first = tr.samples.front();
    return integral + price(m, sc.env, first.s, first.t) * first.n;
}

} // namespace stand
