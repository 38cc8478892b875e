// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "policy.hpp"
#include "trajectories.hpp"

namespace stand {

inline constexpr int kHypothesisGrid = 1024;
inline constexpr double kAuditTol = 1e-6;

//---------------------------------------------------------------------------//
// Hypotheses
//---------------------------------------------------------------------------//

struct HypothesisCheck {
    std::string name;
    bool pass = true;
    double witness = 0.0;  // time or density of the worst point
    double margin = 0.0;   // worst slack, negative when failing
    std::string note;
};

/// V positive, non-increasing and convex on [0, t_star].
inline HypothesisCheck check_h1(const Environment& env, double t_star) {
    HypothesisCheck h{"H1", true, 0.0, HUGE_VAL, {}};
    const int m = kHypothesisGrid;
    for (int i = 0; i < m; ++i) {
        const double a = t_star * i / m;
        const double b = t_star * (i + 1) / m;
        const double va = env.V(a), vb = env.V(b), vm = env.V(0.5 * (a + b));
        const double slack = std::min({va, va - vb, 0.5 * (va + vb) - vm});
        if (slack < h.margin) {
            h.margin = slack;
            h.witness = a;
        }
    }
    h.pass = h.margin >= -1e-12 * env.V(0.0);
    if (env.weakly_decreasing())
        h.note = "V is constant: accepted, but not strictly decreasing";
    return h;
}

/// g increasing, concave, g(r) > r on (0,1), sampled.
inline HypothesisCheck check_h2(const GrowthFunction& g) {
    HypothesisCheck h{"H2", true, 0.0, HUGE_VAL, {}};
    const int m = kHypothesisGrid;
    const double d = 1e-4;
    for (int i = 1; i < m; ++i) {
        const double r = static_cast<double>(i) / m;
        const double above = g.value(r) - r;
        const double slope = g.derivative(r);
        const double curv = -(g.value(std::min(r + d, 1.0)) - 2 * g.value(r) +
                              g.value(std::max(r - d, 0.0)));
        const double slack = std::min({above, slope, curv + 1e-12});
        if (slack < h.margin) {
            h.margin = slack;
            h.witness = r;
        }
    }
    h.pass = h.margin > 0.0;
    if (!h.pass)
        h.note = "g(r) > r fails (linear growth is the degenerate limit)";
    return h;
}

struct H3Result {
    bool pass = true;
    double margin = HUGE_VAL;  // min over the grid of e_max - e_r(s_m(t), t)
    double worst_t = 0.0;
};

/// e_r(s_m(t), t) < e_max on a 1024-point grid over [0, t_star].
inline H3Result check_h3(const Scenario& sc, const std::function<double(double)>& s_m) {
    H3Result out;
    const auto& p = sc.params;
    for (int i = 0; i < kHypothesisGrid; ++i) {
        const double t = p.t_star * i / (kHypothesisGrid - 1);
        const double slack = p.e_max - p.half_q() * sc.env.V(t) / s_m(t);
        if (slack < out.margin) {
            out.margin = slack;
            out.worst_t = t;
        }
    }
    out.pass = out.margin > 0.0;
    return out;
}

inline HypothesisCheck check_h4(const GrowthFunction& g) {
    HypothesisCheck h{"H4", g.gamma_lower() > 0.0, 0.0, g.gamma_lower(), {}};
    return h;
}

//---------------------------------------------------------------------------//
// Reference trajectories E0 and E^0
//---------------------------------------------------------------------------//

/// E0 and E^0 integrated over [0, horizon] on a common step; both stop at
/// their exit points when reached.
struct ReferenceEnvelopes {
    Trajectory lower;  // E0: fastest thinning
    Trajectory upper;  // E^0: no thinning until r = 1, then the boundary
    double step = 0.0;

    double common_end() const { return std::min(lower.validity_end, upper.validity_end); }
};

inline ReferenceEnvelopes reference_envelopes(const Scenario& sc, double horizon,
                                              double step = 0.0) {
    IntegrateOptions opt;
    opt.step = step > 0.0 ? step : horizon / kDefaultSteps;
    ReferenceEnvelopes ref;
    ref.step = opt.step;
    ref.lower = integrate(sc, build_policy(sc, CanonicalKind::E0), horizon, opt);
    ref.upper = integrate(sc, build_policy(sc, CanonicalKind::Esup), horizon, opt);
    return ref;
}

/// Lower bound s_m(t) for H3: s^0(t) on the E^0 trajectory, s(0) past its end.
inline std::function<double(double)> minimal_basal_area(const Scenario& sc,
                                                        const ReferenceEnvelopes& ref) {
    return [&sc, &ref](double t) {
        if (t <= ref.upper.validity_end)
            return ref.upper.state_at(t).s;
        return sc.initial.s;
    };
}

//---------------------------------------------------------------------------//
// Thresholds on the exponent b
//---------------------------------------------------------------------------//

/// g(r(n_min, s(0))), the competition factor at the lowest admissible density.
inline double g_low0(const Scenario& sc) {
    return sc.growth.value(rdi(sc.params, sc.params.n_min, sc.initial.s));
}

/// Upper end of the admissible b range for the direct n s^b sandwich:
/// (1 - (q/2) gamma_upper) / (1 - gamma_lower); +inf when gamma_lower = 1.
inline double b_direct_limit(const Scenario& sc) {
    const double gl = sc.growth.gamma_lower(), gu = sc.growth.gamma_upper();
    const double num = 1.0 - sc.params.half_q() * gu;
    if (num <= 0.0)
        return 0.0;
    if (gl >= 1.0)
        return HUGE_VAL;
    return num / (1.0 - gl);
}

struct BThreshold {
    double b_star = 0.0;
    double a_star = 0.0;
    double g_low0 = 0.0;
};

/// b1(a) = (q/2) (1-a) / (1-a-gamma_upper) / g_low0.
inline double b1(const Scenario& sc, double a) {
    const double gu = sc.growth.gamma_upper();
    return sc.params.half_q() * (1.0 - a) / (1.0 - a - gu) / g_low0(sc);
}

/// b2(a) = (q/2) / g_low0 + (1 - (q/2) gamma_lower) / a.
inline double b2(const Scenario& sc, double a) {
    return sc.params.half_q() / g_low0(sc) +
           (1.0 - sc.params.half_q() * sc.growth.gamma_lower()) / a;
}

/// Threshold b_* above which the n s^b sandwich reverses, and the a_* where
/// b1(a) = b2(a) attains it.
inline BThreshold b_star(const Scenario& sc) {
    const double gl = sc.growth.gamma_lower(), gu = sc.growth.gamma_upper();
    if (gu >= 1.0 - 1e-9)
        throw Undefined("b_star: gamma_upper >= 1, threshold is infinite");
    const double c = sc.params.half_q();
    BThreshold out;
    out.g_low0 = g_low0(sc);
    const double inv_g = 1.0 / out.g_low0;
    out.b_star = (1.0 + c * (inv_g - gl)) / (1.0 - gu);
    out.a_star = (1.0 - gu) * (1.0 - c * gl) / (1.0 + c * (gu * inv_g - gl));
    return out;
}

//---------------------------------------------------------------------------//
// Relative growth lower bound
//---------------------------------------------------------------------------//

/// xi_m(t) = s0'(t) / (s0(t)^(q/2) S^(1-q/2)) where s0 is the E^0 basal area
/// and S is s_bar, or the E0 basal area for power-family growth.
inline double xi_m(const Scenario& sc, const ReferenceEnvelopes& ref, double t) {
    const auto& p = sc.params;
    const StandState up = ref.upper.state_at(t);
    const double r_up = rdi(p, up.n, up.s);
    const double ds_up = sc.growth.value(r_up) * sc.env.V(t) / up.n;
    double cap = p.s_bar();
    if (sc.growth.is_power_family() && t <= ref.lower.validity_end)
        cap = ref.lower.state_at(t).s;
    return ds_up / (std::pow(up.s, p.half_q()) * std::pow(cap, 1.0 - p.half_q()));
}

//---------------------------------------------------------------------------//
// Trajectory audit
//---------------------------------------------------------------------------//

struct Violation {
    double t = 0.0;
    std::string quantity;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct AuditOptions {
    /// Exponents for the direct n s^b sandwich; empty selects defaults below
    /// the admissible limit (including b = q/2 when admissible).
    std::vector<double> b_direct;
    /// Exponents for the reversed sandwich; empty selects defaults above b_*.
    std::vector<double> b_reversed;
    double tol = kAuditTol;
    /// Largest b for which the reversed sandwich is evaluated.
    double b_max = 60.0;
    /// Check the n(T) = n_min envelopes against E_T.
    bool terminal_envelopes = true;
};

struct BoundReport {
    std::vector<HypothesisCheck> hypotheses;
    std::optional<double> b_star;
    std::optional<double> a_star;
    std::vector<double> b_direct;
    std::vector<double> b_reversed;
    std::vector<std::pair<double, double>> xi_m;  // (t, xi_m(t))
    std::vector<Violation> envelope_violations;
    std::size_t checks = 0;
    std::size_t trajectories = 0;

    bool ok() const noexcept { return envelope_violations.empty(); }
};

/// Exponent lists used by the audit for a scenario.
inline void resolve_exponents(const Scenario& sc, AuditOptions& opt) {
    if (opt.b_direct.empty()) {
        const double lim = b_direct_limit(sc);
        if (lim > 0.0) {
            opt.b_direct.push_back(0.5 * std::min(lim, 4.0));
            if (sc.params.half_q() < lim)
                opt.b_direct.push_back(sc.params.half_q());
        }
    }
    if (opt.b_reversed.empty()) {
        try {
            const double bs = b_star(sc).b_star;
            for (double b : {bs * 1.05 + 0.1, bs * 1.5 + 1.0})
                if (b <= opt.b_max)
                    opt.b_reversed.push_back(b);
        } catch (const Undefined&) {
        }
    }
}

/// Hypothesis flags and thresholds for a scenario, without trajectory checks.
inline BoundReport bound_report_header(const Scenario& sc, const ReferenceEnvelopes& ref,
                                       const AuditOptions& opt) {
    BoundReport rep;
    rep.hypotheses.push_back(check_h1(sc.env, sc.params.t_star));
    rep.hypotheses.push_back(check_h2(sc.growth));
    const auto h3 = check_h3(sc, minimal_basal_area(sc, ref));
    rep.hypotheses.push_back({"H3", h3.pass, h3.worst_t, h3.margin, {}});
    rep.hypotheses.push_back(check_h4(sc.growth));
    try {
        const auto bs = b_star(sc);
        rep.b_star = bs.b_star;
        rep.a_star = bs.a_star;
    } catch (const Undefined&) {
    }
    rep.b_direct = opt.b_direct;
    rep.b_reversed = opt.b_reversed;
    const double end = ref.upper.validity_end;
    for (int i = 1; i <= 64; ++i) {
        const double t = end * i / 64.0;
        rep.xi_m.emplace_back(t, xi_m(sc, ref, t));
    }
    return rep;
}

namespace detail {

class Auditor {
  public:
    Auditor(const Scenario& sc, const ReferenceEnvelopes& ref, const AuditOptions& opt,
            BoundReport& rep)
        : sc_(sc), p_(sc.params), ref_(ref), opt_(opt), rep_(rep) {}

    void run(const Trajectory& tr) {
        ++rep_.trajectories;
        const bool power = sc_.growth.is_power_family();
        const double end = std::min(tr.validity_end, ref_.common_end());

        std::optional<Trajectory> et;
        double t_floor = HUGE_VAL;
        if (opt_.terminal_envelopes) {
            auto hit = tr.first_event(EventKind::NMinHit);
            if (!hit)
                hit = tr.first_event(EventKind::ExitPoint);
            if (hit && *hit > 0.0) {
                t_floor = *hit;
                IntegrateOptions io;
                io.step = ref_.step;
                et = integrate(sc_, build_policy(sc_, CanonicalKind::ET, t_floor), t_floor, io);
            }
        }

        double prev_ratio = -HUGE_VAL;
        for (const auto& x : tr.samples) {
            const double g_over_n = sc_.growth.value(x.r) / x.n;
            less("monotone g(r)/n nondecreasing", x.t, prev_ratio, g_over_n);
            prev_ratio = g_over_n;

            if (x.t > end)
                break;
            const StandState lo = ref_.lower.state_at(x.t);
            const StandState up = ref_.upper.state_at(x.t);

            less("count n0 <= n", x.t, lo.n, x.n);
            less("count n <= n^0", x.t, x.n, up.n);
            less("basal s^0 <= s", x.t, up.s, x.s);
            if (power)
                less("basal s <= s0", x.t, x.s, lo.s);

            const double gn_up = sc_.growth.value(rdi(p_, up.n, up.s)) / up.n;
            less("growth g(r^0)/n^0 <= g(r)/n", x.t, gn_up, g_over_n);
            if (power) {
                const double gn_lo = sc_.growth.value(rdi(p_, lo.n, lo.s)) / lo.n;
                less("growth g(r)/n <= g(r0)/n0", x.t, g_over_n, gn_lo);
            }

            auto log_nsb = [](const StandState& z, double b) {
                return std::log(z.n) + b * std::log(z.s);
            };
            const StandState me{x.t, x.s, x.n};
            for (double b : opt_.b_direct) {
                const std::string tag = "nsb-direct b=" + fmt(b);
                if (power)
                    less_log(tag + " n0 s0^b <= n s^b", x.t, log_nsb(lo, b), log_nsb(me, b));
                less_log(tag + " n s^b <= n^0 s^0^b", x.t, log_nsb(me, b), log_nsb(up, b));
            }
            for (double b : opt_.b_reversed) {
                const std::string tag = "nsb-reversed b=" + fmt(b);
                less_log(tag + " n^0 s^0^b <= n s^b", x.t, log_nsb(up, b), log_nsb(me, b));
                if (power)
                    less_log(tag + " n s^b <= n0 s0^b", x.t, log_nsb(me, b), log_nsb(lo, b));
            }

            const double xi = x.ds / x.s;
            less("relgrowth xi_m <= xi", x.t, xi_m(sc_, ref_, x.t), xi);

            if (et && x.t <= std::min(t_floor, et->validity_end)) {
                const StandState zt = et->state_at(x.t);
                less("terminal n <= n_T", x.t, x.n, zt.n);
                if (power)
                    less("terminal s_T <= s", x.t, zt.s, x.s);
            }
        }
    }

  private:
    static std::string fmt(double b) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", b);
        return buf;
    }

    void less(const std::string& what, double t, double lhs, double rhs) {
        ++rep_.checks;
        if (lhs <= rhs + opt_.tol * std::max(std::abs(lhs), std::abs(rhs)))
            return;
        rep_.envelope_violations.push_back({t, what, lhs, rhs});
    }

    void less_log(const std::string& what, double t, double lhs, double rhs) {
        ++rep_.checks;
        if (lhs <= rhs + opt_.tol)
            return;
        rep_.envelope_violations.push_back({t, what, lhs, rhs});
    }

    const Scenario& sc_;
    const StandParams& p_;
    const ReferenceEnvelopes& ref_;
    const AuditOptions& opt_;
    BoundReport& rep_;
};

} // namespace detail

/// Check every sampled envelope inequality along `tr` against the E0/E^0
/// references (and E_T when the trajectory reaches n_min). Violations beyond
/// the tolerance are appended to `rep`.
inline void audit_into(const Scenario& sc, const Trajectory& tr, const ReferenceEnvelopes& ref,
                       const AuditOptions& opt, BoundReport& rep) {
    detail::Auditor(sc, ref, opt, rep).run(tr);
}

inline BoundReport audit_trajectory(const Scenario& sc, const Trajectory& tr,
                                    const ReferenceEnvelopes& ref, AuditOptions opt = {}) {
    resolve_exponents(sc, opt);
    BoundReport rep = bound_report_header(sc, ref, opt);
    audit_into(sc, tr, ref, opt, rep);
    return rep;
}

} // namespace stand
