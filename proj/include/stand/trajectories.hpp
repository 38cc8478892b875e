// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "dynamics.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "policy.hpp"

namespace stand {

/// Time to thin from n0 down to n at the maximum rate.
inline double time_to_count(const StandParams& p, double n0, double n) {
    if (n > n0)
        throw DomainError("time_to_count: target n exceeds n0");
    return (n0 - n) / p.e_max;
}

/// Energy needed for the RDI to climb from r(0) to 1 with no cutting:
///   integral_{r0}^{1} u^(2/q-1) / g(u) du  /  ((q/2) n0^(2/q-1) A^(2/q)).
inline double energy_to_full_density(const Scenario& sc) {
    const auto& p = sc.params;
    const double r0 = sc.initial_rdi();
    const double expo = 2.0 / p.q - 1.0;
    const double rhs = numerics::integrate(
        [&](double u) { return std::pow(u, expo) / sc.growth.value(u); }, r0, 1.0);
    const double lhs_factor = p.half_q() * std::pow(sc.initial.n, expo) * std::pow(p.A, 2.0 / p.q);
    return rhs / lhs_factor;
}

/// First time r reaches 1 under zero cutting.
inline double t_sup0(const Scenario& sc) {
    sc.validate();
    const double need = energy_to_full_density(sc);
    const auto t = numerics::increasing_root(
        [&](double T) { return sc.env.energy(0.0, T) - need; }, 0.0, sc.params.t_star);
    if (!t)
        throw NoCrossing("r never reaches 1 within t_star under zero cutting");
    return *t;
}

/// Tree count along the boundary arc r = 1 entered at t_enter with n_enter trees:
///   n^(1-2/q) = n_enter^(1-2/q) + A^(2/q) (1 - q/2) V(t_enter; t).
inline double boundary_arc_count(const Scenario& sc, double t_enter, double n_enter, double t) {
    const auto& p = sc.params;
    const double expo = 1.0 - 2.0 / p.q;
    const double lhs = std::pow(n_enter, expo) +
                       std::pow(p.A, 2.0 / p.q) * (1.0 - p.half_q()) * sc.env.energy(t_enter, t);
    return std::pow(lhs, 1.0 / expo);
}

/// Energy the boundary arc must consume to bring n from n0 to n_min.
inline double boundary_arc_energy(const StandParams& p, double n0) {
    const double expo = 1.0 - 2.0 / p.q;
    return (std::pow(p.n_min, expo) - std::pow(n0, expo)) /
           (std::pow(p.A, 2.0 / p.q) * (1.0 - p.half_q()));
}

/// End of the boundary arc of E^0, where n reaches n_min.
inline double t_cap0(const Scenario& sc) {
    const double t0 = t_sup0(sc);
    const double need = boundary_arc_energy(sc.params, sc.initial.n);
    const auto T = numerics::increasing_root(
        [&](double t) { return sc.env.energy(t0, t) - need; }, t0, sc.params.t_star);
    if (!T)
        throw NoReach("boundary arc does not reach n_min within t_star");
    return *T;
}

enum class CanonicalKind { E0, ET, Esup };

/// Switch time t_* of the long-horizon E_T: boundary arc from t^0 until
/// (T - t_*) e_max = n(t_*) - n_min.
inline double et_switch_time(const Scenario& sc, double T, double t0) {
    const auto& p = sc.params;
    const double n0 = sc.initial.n;
    auto F = [&](double t) {
        return (T - t) * p.e_max - (boundary_arc_count(sc, t0, n0, t) - p.n_min);
    };
    return numerics::bisect([&](double t) { return -F(t); }, t0, T);
}

/// Canonical thinning policies:
///  - E0: maximum rate until n_min, then nothing;
///  - Esup: nothing until r = 1, then ride the boundary;
///  - ET(T): reach n_min exactly at T, cutting as late as possible.
inline Policy build_policy(const Scenario& sc, CanonicalKind kind, double T = 0.0) {
    sc.validate();
    const auto& p = sc.params;
    const double t0n = time_to_count(p, sc.initial.n, p.n_min);
    const Policy e0 = t0n > 0.0
                          ? Policy(PolicyKind::E0, {t0n}, {Level::of_rate(p.e_max), Level::of_rate(0.0)})
                          : Policy(PolicyKind::E0, {}, {Level::of_rate(0.0)});
    switch (kind) {
    case CanonicalKind::E0: return e0;
    case CanonicalKind::Esup: return Policy(PolicyKind::Esup, {}, {Level::hold()});
    case CanonicalKind::ET: break;
    }

    if (!(T > 0.0) || !std::isfinite(T))
        throw DomainError("build_policy: E_T needs a positive horizon T");
    if (T <= t0n)
        return Policy(PolicyKind::ET, e0.breakpoints(), e0.levels(), T);

    std::optional<double> t0;
    try {
        t0 = t_sup0(sc);
    } catch (const NoCrossing&) {
    }
    if (!t0 || T < t0n + *t0) {
        return Policy(PolicyKind::ET, {T - t0n, T},
                      {Level::of_rate(0.0), Level::of_rate(p.e_max), Level::of_rate(0.0)}, T);
    }
    std::optional<double> cap;
    try {
        cap = t_cap0(sc);
    } catch (const NoReach&) {
    }
    if (cap && T > *cap * (1.0 + 1e-7))
        throw DomainError("build_policy: E_T needs T <= T^0 = " + std::to_string(*cap));
    if (cap && T >= *cap - numerics::kTimeTol)
        return Policy(PolicyKind::ET, {}, {Level::hold()}, T);
    const double ts = et_switch_time(sc, T, *t0);
    if (ts >= T)
        return Policy(PolicyKind::ET, {}, {Level::hold()}, T);
    return Policy(PolicyKind::ET, {ts, T},
                  {Level::hold(), Level::of_rate(p.e_max), Level::of_rate(0.0)}, T);
}

//---------------------------------------------------------------------------//
// Extremal times and characteristic times
//---------------------------------------------------------------------------//

struct ExtremalTimes {
    std::optional<double> lower;  // minimal exit time
    std::optional<double> upper;  // maximal exit time
    /// E0 minimality is only established for g(r) = r^(1-theta).
    bool lower_is_heuristic = false;
};

/// Exit time under zero cutting-independent growth (g(r) = r):
///   s0^(1-q/2) + A (1-q/2) V(0;T) = s_bar^(1-q/2).
inline std::optional<double> linear_exit_time(const Scenario& sc) {
    const auto& p = sc.params;
    const double expo = 1.0 - p.half_q();
    const double need =
        (std::pow(p.s_bar(), expo) - std::pow(sc.initial.s, expo)) / (p.A * expo);
    return numerics::increasing_root([&](double T) { return sc.env.energy(0.0, T) - need; }, 0.0,
                                     p.t_star);
}

inline ExtremalTimes extremal_times(const Scenario& sc) {
    sc.validate();
    ExtremalTimes out;
    try {
        out.upper = t_cap0(sc);
    } catch (const NoCrossing&) {
    } catch (const NoReach&) {
    }
    out.lower_is_heuristic = !sc.growth.is_power_family();
    if (sc.growth.is_linear()) {
        out.lower = linear_exit_time(sc);
        return out;
    }
    IntegrateOptions opt;
    opt.step = sc.params.t_star / (4 * kDefaultSteps);
    const auto tr = integrate(sc, build_policy(sc, CanonicalKind::E0), sc.params.t_star, opt);
    if (tr.termination == Termination::ExitPoint)
        out.lower = tr.validity_end;
    return out;
}

struct CharacteristicTimes {
    double t0_n = 0.0;                     // thinning time from n(0) to n_min at e_max
    std::optional<double> t_sup0;          // first time r = 1 under zero cutting
    std::optional<double> t_cap0;          // end of the E^0 boundary arc
    std::optional<double> t_star_switch;   // E_T switch time, when requested
    std::optional<double> et_horizon;
    std::optional<double> t_lower;
    std::optional<double> t_upper;
    bool lower_is_heuristic = false;
};

/// All characteristic times; `et_horizon` optionally requests t_* for E_T.
inline CharacteristicTimes characteristic_times(const Scenario& sc,
                                                std::optional<double> et_horizon = std::nullopt) {
    sc.validate();
    CharacteristicTimes ct;
    ct.t0_n = time_to_count(sc.params, sc.initial.n, sc.params.n_min);
    try {
        ct.t_sup0 = t_sup0(sc);
        ct.t_cap0 = t_cap0(sc);
    } catch (const NoCrossing&) {
    } catch (const NoReach&) {
    }
    const auto ext = extremal_times(sc);
    ct.t_lower = ext.lower;
    ct.t_upper = ext.upper;
    ct.lower_is_heuristic = ext.lower_is_heuristic;
    if (et_horizon && ct.t_sup0 && *et_horizon >= ct.t0_n + *ct.t_sup0 &&
        (!ct.t_cap0 || *et_horizon < *ct.t_cap0)) {
        ct.et_horizon = et_horizon;
        ct.t_star_switch = et_switch_time(sc, *et_horizon, *ct.t_sup0);
    }
    return ct;
}

//---------------------------------------------------------------------------//
// Validity diagnostics from the available energy V(0; t_star)
//---------------------------------------------------------------------------//

enum class ExitVerdict {
    Reachable,      // every policy reaches the exit point before t_star
    Unreachable,    // no policy can reach the exit point before t_star
    Indeterminate,  // neither sufficient bound decides
};

inline std::string to_string(ExitVerdict v) {
    switch (v) {
    case ExitVerdict::Reachable: return "exit reachable";
    case ExitVerdict::Unreachable: return "exit unreachable";
    case ExitVerdict::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

struct ValidityDiagnostic {
    ExitVerdict verdict = ExitVerdict::Indeterminate;
    /// s(0)^(1-q/2) + A (1-q/2) V(0;t_star) - s_bar^(1-q/2); > 0 forces the exit.
    double forced_exit_margin = 0.0;
    /// s_bar - s(0) - V(0;t_star) / n_min; > 0 rules the exit out.
    double no_exit_margin = 0.0;
};

inline ValidityDiagnostic validity_diagnostic(const Scenario& sc) {
    sc.validate();
    const auto& p = sc.params;
    const double energy = sc.env.energy(0.0, p.t_star);
    const double expo = 1.0 - p.half_q();
    ValidityDiagnostic d;
    d.forced_exit_margin = std::pow(sc.initial.s, expo) + p.A * expo * energy -
                           std::pow(p.s_bar(), expo);
    d.no_exit_margin = p.s_bar() - sc.initial.s - energy / p.n_min;
    if (d.forced_exit_margin > 0.0)
        d.verdict = ExitVerdict::Reachable;
    else if (d.no_exit_margin > 0.0)
        d.verdict = ExitVerdict::Unreachable;
    return d;
}

} // namespace stand
