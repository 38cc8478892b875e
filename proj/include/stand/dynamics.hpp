// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "policy.hpp"

namespace stand {

//---------------------------------------------------------------------------//
// Right-hand side of the controlled system
//---------------------------------------------------------------------------//

struct Derivative {
    double ds = 0.0;
    double dn = 0.0;
};

/// (ds/dt, dn/dt) = (g(r) V(t) / n, -e).
inline Derivative rhs(const Scenario& sc, const StandState& x, double e) {
    if (!(x.n > 0.0) || !(x.s > 0.0))
        throw DomainError("rhs: n and s must be positive");
    if (!(e >= 0.0))
        throw DomainError("rhs: thinning rate must be >= 0");
    const double r = rdi(sc.params, x.n, x.s);
    return {sc.growth.value(r) * sc.env.V(x.t) / x.n, -e};
}

/// dr/dt = (r/n) [ (q/2) g(r) V(t) / s - e ].
inline double drdt(const Scenario& sc, const StandState& x, double e) {
    if (!(x.n > 0.0) || !(x.s > 0.0))
        throw DomainError("drdt: n and s must be positive");
    const double r = rdi(sc.params, x.n, x.s);
    return r / x.n * (sc.params.half_q() * sc.growth.value(r) * sc.env.V(x.t) / x.s - e);
}

//---------------------------------------------------------------------------//
// Trajectory
//---------------------------------------------------------------------------//

enum class EventKind { RdiHitOne, NMinHit, ExitPoint, HorizonEnd, BoundaryLeave };

inline std::string to_string(EventKind k) {
    switch (k) {
    case EventKind::RdiHitOne: return "RdiHitOne";
    case EventKind::NMinHit: return "NMinHit";
    case EventKind::ExitPoint: return "ExitPoint";
    case EventKind::HorizonEnd: return "HorizonEnd";
    case EventKind::BoundaryLeave: return "BoundaryLeave";
    }
    return "unknown";
}

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::HorizonEnd;
};

/// One integrator output point. `e` is the control applied from t onwards,
/// `e_left` the control applied just before t; they differ at switches.
struct Sample {
    double t = 0.0;
    double s = 0.0;
    double n = 0.0;
    double r = 0.0;
    double e = 0.0;
    double e_left = 0.0;
    double drdt = 0.0;
    double ds = 0.0;

    StandState state() const noexcept { return {t, s, n}; }
};

enum class Termination {
    Horizon,       // reached the requested horizon
    ExitPoint,     // left the validity domain through (r, n) = (1, n_min)
    RdiViolation,  // a rate level would push r above 1
};

inline std::string to_string(Termination t) {
    switch (t) {
    case Termination::Horizon: return "horizon";
    case Termination::ExitPoint: return "exit_point";
    case Termination::RdiViolation: return "rdi_violation";
    }
    return "unknown";
}

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<Event> events;
    double horizon = 0.0;
    double validity_end = 0.0;
    Termination termination = Termination::Horizon;

    bool reached_horizon() const noexcept { return termination == Termination::Horizon; }
    const Sample& back() const { return samples.back(); }

    std::optional<double> first_event(EventKind k) const {
        for (const auto& ev : events)
            if (ev.kind == k)
                return ev.t;
        return std::nullopt;
    }

    /// State at time t in [0, validity_end]: cubic Hermite in s (using ds/dt)
    /// and in n (using the one-sided controls of the bracketing samples).
    StandState state_at(double t) const {
        if (samples.empty())
            throw DomainError("state_at: empty trajectory");
        if (t <= samples.front().t)
            return samples.front().state();
        if (t >= samples.back().t)
            return samples.back().state();
        auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double v, const Sample& x) { return v < x.t; });
        const Sample& b = *it;
        const Sample& a = *(it - 1);
        const double h = b.t - a.t;
        if (h <= 0.0)
            return b.state();
        const double u = (t - a.t) / h;
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
        const double h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u);
        const double h11 = u * u * (u - 1);
        const double s = h00 * a.s + h10 * h * a.ds + h01 * b.s + h11 * h * b.ds;
        const double n = h00 * a.n - h10 * h * a.e + h01 * b.n - h11 * h * b.e_left;
        return {t, s, n};
    }
};

//---------------------------------------------------------------------------//
// Integration
//---------------------------------------------------------------------------//

struct IntegrateOptions {
    /// Fixed step; 0 selects horizon / 4096.
    double step = 0.0;
    /// When a rate level is below e_r(s,t) at r = 1, ride the boundary with
    /// e = e_r instead of stopping with RdiHitOne.
    bool saturate = false;
    /// Fault-injection hook: multiplies ds/dt. Leave at 1 outside tests.
    double growth_bias = 1.0;
};

inline constexpr int kDefaultSteps = 4096;
inline constexpr double kExitTieTol = 1e-7;

namespace detail {

enum class Mode { Free, Boundary, Floor };

class Integrator {
  public:
    Integrator(const Scenario& sc, const Policy& policy, double horizon,
               const IntegrateOptions& opt)
        : sc_(sc), p_(sc.params), policy_(policy), horizon_(horizon), opt_(opt) {
        h_ = opt.step > 0.0 ? opt.step : horizon / kDefaultSteps;
    }

    Trajectory run() {
        traj_.horizon = horizon_;
        StandState x = sc_.initial;
        seg_ = policy_.segment_index(0.0);
        mode_ = Mode::Free;
        if (x.n <= p_.n_min * (1.0 + kExitTieTol))
            mode_ = Mode::Floor;
        double e_left = control(x);
        if (enter_segment(x))
            return finish(x, e_left);
        push(x, e_left);

        while (x.t < horizon_) {
            const double t_end = std::min({x.t + h_, policy_.segment_end(seg_), horizon_});
            double dt = t_end - x.t;
            if (dt <= horizon_ * 1e-15) {
                // Zero-width segment or round-off remnant.
                x.t = t_end;
                if (x.t >= policy_.segment_end(seg_)) {
                    e_left = control(x);
                    ++seg_;
                    if (enter_segment(x))
                        return finish(x, e_left);
                }
                continue;
            }
            StandState y = rk4(x, dt);
            y.t = t_end;
            const auto ev = detect(x, y, dt);
            if (!ev) {
                if (mode_ == Mode::Boundary)
                    project(y);
                x = y;
                if (mode_ == Mode::Boundary)
                    check_boundary_feasible(x);
                e_left = control(x);
                if (x.t >= horizon_) {
                    push(x, e_left);
                    break;
                }
                if (x.t >= policy_.segment_end(seg_)) {
                    ++seg_;
                    if (enter_segment(x))
                        return finish(x, e_left);
                }
                push(x, e_left);
                continue;
            }
            // Event inside the step.
            x = rk4(x, ev->second);
            x.t = std::min(x.t, t_end);
            e_left = control(x);
            if (apply_event(ev->first, x))
                return finish(x, e_left);
            if (x.t >= horizon_) {
                push(x, e_left);
                break;
            }
            if (x.t >= policy_.segment_end(seg_)) {
                ++seg_;
                if (enter_segment(x))
                    return finish(x, e_left);
            }
            push(x, e_left);
        }
        traj_.termination = Termination::Horizon;
        traj_.validity_end = traj_.samples.back().t;
        traj_.events.push_back({traj_.validity_end, EventKind::HorizonEnd});
        return std::move(traj_);
    }

  private:
    enum class Pending { Rdi, NMin, Leave };

    double rdi_of(const StandState& x) const { return p_.A * x.n * std::pow(x.s, p_.half_q()); }
    double e_r(const StandState& x) const {
        return opt_.growth_bias * p_.half_q() * sc_.env.V(x.t) / x.s;
    }
    const Level& level() const { return policy_.level(seg_); }

    double control(const StandState& x) const {
        switch (mode_) {
        case Mode::Floor: return 0.0;
        case Mode::Boundary: return e_r(x);
        case Mode::Free: return level().is_hold() ? 0.0 : level().rate;
        }
        return 0.0;
    }

    Derivative f(const StandState& x) const {
        const double n = std::max(x.n, 1e-300);
        const double r = p_.A * n * std::pow(x.s, p_.half_q());
        return {opt_.growth_bias * sc_.growth.value(r) * sc_.env.V(x.t) / n, -control(x)};
    }

    StandState rk4(const StandState& x, double dt) const {
        const auto k1 = f(x);
        const auto k2 = f({x.t + 0.5 * dt, x.s + 0.5 * dt * k1.ds, x.n + 0.5 * dt * k1.dn});
        const auto k3 = f({x.t + 0.5 * dt, x.s + 0.5 * dt * k2.ds, x.n + 0.5 * dt * k2.dn});
        const auto k4 = f({x.t + dt, x.s + dt * k3.ds, x.n + dt * k3.dn});
        return {x.t + dt, x.s + dt / 6.0 * (k1.ds + 2 * k2.ds + 2 * k3.ds + k4.ds),
                x.n + dt / 6.0 * (k1.dn + 2 * k2.dn + 2 * k3.dn + k4.dn)};
    }

    void project(StandState& x) const { x.s = p_.s_at_full_density(x.n); }

    void check_boundary_feasible(const StandState& x) const {
        const double er = e_r(x);
        if (er > p_.e_max * (1.0 + 1e-12))
            throw InfeasibleBoundary(x.t, er, p_.e_max);
    }

    /// Earliest event inside (0, dt], located by bisection on the sub-step.
    std::optional<std::pair<Pending, double>> detect(const StandState& x, const StandState& y,
                                                     double dt) const {
        std::optional<std::pair<Pending, double>> best;
        auto consider = [&](Pending k, double tau) {
            if (!best || tau < best->second)
                best = std::make_pair(k, tau);
        };
        auto locate = [&](auto&& phi) {
            // phi(0) <= 0 < phi(dt)
            return numerics::bisect([&](double tau) { return tau == 0.0 ? -1.0 : phi(tau); }, 0.0,
                                    dt, numerics::kTimeTol);
        };
        const double slack = 1e-12;
        switch (mode_) {
        case Mode::Free:
        case Mode::Floor:
            if (rdi_of(y) > 1.0 + slack)
                consider(Pending::Rdi, locate([&](double tau) { return rdi_of(rk4(x, tau)) - 1.0; }));
            if (mode_ == Mode::Free && y.n < p_.n_min) {
                const double e = control(x);
                consider(Pending::NMin, std::clamp((x.n - p_.n_min) / e, 0.0, dt));
            }
            break;
        case Mode::Boundary:
            if (y.n < p_.n_min)
                consider(Pending::NMin, locate([&](double tau) { return p_.n_min - rk4(x, tau).n; }));
            if (!level().is_hold()) {
                const double x_rate = level().rate;
                auto leave = [&](const StandState& z) {
                    StandState zz = z;
                    project(zz);
                    return x_rate - e_r(zz) * (1.0 + slack);
                };
                if (leave(y) > 0.0)
                    consider(Pending::Leave, locate([&](double tau) { return leave(rk4(x, tau)); }));
            }
            break;
        }
        return best;
    }

    /// Returns true when integration must stop.
    bool apply_event(Pending k, StandState& x) {
        switch (k) {
        case Pending::Rdi:
            project(x);
            if (mode_ == Mode::Floor || std::abs(x.n - p_.n_min) <= kExitTieTol * p_.n_min)
                return exit_point(x);
            traj_.events.push_back({x.t, EventKind::RdiHitOne});
            return enter_boundary(x);
        case Pending::NMin:
            x.n = p_.n_min;
            if (mode_ == Mode::Boundary) {
                project(x);
                return exit_point(x);
            }
            if (std::abs(rdi_of(x) - 1.0) <= kExitTieTol) {
                project(x);
                return exit_point(x);
            }
            traj_.events.push_back({x.t, EventKind::NMinHit});
            mode_ = Mode::Floor;
            return false;
        case Pending::Leave:
            project(x);
            traj_.events.push_back({x.t, EventKind::BoundaryLeave});
            mode_ = Mode::Free;
            return false;
        }
        return false;
    }

    bool exit_point(StandState& x) {
        x.n = p_.n_min;
        project(x);
        traj_.events.push_back({x.t, EventKind::ExitPoint});
        traj_.termination = Termination::ExitPoint;
        return true;
    }

    /// Stand just reached r = 1 in Free mode.
    bool enter_boundary(StandState& x) {
        const Level& l = level();
        if (l.is_hold() || (opt_.saturate && l.rate < e_r(x))) {
            mode_ = Mode::Boundary;
            check_boundary_feasible(x);
            return false;
        }
        if (l.rate >= e_r(x))
            return false;  // cutting fast enough to stay inside
        traj_.termination = Termination::RdiViolation;
        return true;
    }

    /// Segment switch at x.t; returns true when integration must stop.
    bool enter_segment(StandState& x) {
        if (mode_ != Mode::Boundary || level().is_hold())
            return false;
        const double rate = level().rate;
        const double er = e_r(x);
        if (rate > er * (1.0 + 1e-12)) {
            traj_.events.push_back({x.t, EventKind::BoundaryLeave});
            mode_ = Mode::Free;
            return false;
        }
        if (opt_.saturate)
            return false;
        traj_.events.push_back({x.t, EventKind::RdiHitOne});
        traj_.termination = Termination::RdiViolation;
        return true;
    }

    void push(const StandState& x, double e_left) {
        Sample smp;
        smp.t = x.t;
        smp.s = x.s;
        smp.n = x.n;
        smp.r = rdi_of(x);
        smp.e = control(x);
        smp.e_left = e_left;
        smp.ds = opt_.growth_bias * sc_.growth.value(smp.r) * sc_.env.V(x.t) / x.n;
        smp.drdt = smp.r / x.n *
                   (p_.half_q() * sc_.growth.value(smp.r) * sc_.env.V(x.t) / x.s - smp.e);
        if (!traj_.samples.empty() && smp.t <= traj_.samples.back().t) {
            // Coincident event and step end: keep the later control.
            smp.e_left = traj_.samples.back().e_left;
            traj_.samples.back() = smp;
            return;
        }
        if (traj_.samples.size() > 16 * (horizon_ / h_ + 64.0))
            throw std::runtime_error("integrate: events stopped advancing at t = " +
                                     std::to_string(smp.t));
        traj_.samples.push_back(smp);
    }

    Trajectory finish(const StandState& x, double e_left) {
        // Terminal sample: no control applies past the stop.
        push(x, e_left);
        traj_.samples.back().e = traj_.samples.back().e_left;
        traj_.validity_end = x.t;
        return std::move(traj_);
    }

    const Scenario& sc_;
    const StandParams& p_;
    const Policy& policy_;
    double horizon_;
    IntegrateOptions opt_;
    double h_ = 0.0;
    std::size_t seg_ = 0;
    Mode mode_ = Mode::Free;
    Trajectory traj_;
};

} // namespace detail

/// Integrate the stand under `policy` over [0, horizon] with fixed-step RK4,
/// bisection-located events (r reaching 1, n reaching n_min), and projection
/// onto r = 1 along boundary arcs. Stops early at the exit point or when a
/// rate level would violate r <= 1.
inline Trajectory integrate(const Scenario& sc, const Policy& policy, double horizon,
                            const IntegrateOptions& opt = {}) {
    sc.validate();
    policy.validate(sc.params);
    if (!(horizon > 0.0) || horizon > sc.params.t_star * (1.0 + 1e-12))
        throw DomainError("integrate: horizon must lie in (0, t_star]");
    if (opt.step < 0.0)
        throw DomainError("integrate: step must be > 0");
    detail::Integrator it(sc, policy, horizon, opt);
    return it.run();
}

inline Trajectory integrate(const Scenario& sc, const Policy& policy, double horizon,
                            double step) {
    IntegrateOptions opt;
    if (!(step > 0.0))
        throw DomainError("integrate: step must be > 0");
    opt.step = step;
    return integrate(sc, policy, horizon, opt);
}

} // namespace stand
