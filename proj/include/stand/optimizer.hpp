// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "dynamics.hpp"
#include "economics.hpp"
#include "errors.hpp"
#include "policy.hpp"
#include "trajectories.hpp"

namespace stand {

//---------------------------------------------------------------------------//
// Sufficient optimality conditions
//---------------------------------------------------------------------------//

enum class Prop2Branch { E0Optimal, EsupOptimal, ETOptimal, None };

inline std::string to_string(Prop2Branch b) {
    switch (b) {
    case Prop2Branch::E0Optimal: return "E0Optimal";
    case Prop2Branch::EsupOptimal: return "EsupOptimal";
    case Prop2Branch::ETOptimal: return "ETOptimal";
    case Prop2Branch::None: return "None";
    }
    return "unknown";
}

struct Prop2Report {
    Prop2Branch branch = Prop2Branch::None;

    // Branch (i): power growth, alpha > alpha_*, delta_h <= alpha (1-theta) xi_m.
    bool convex_applicable = false;
    std::optional<double> alpha_star;
    double convex_alpha_margin = -HUGE_VAL;     // alpha - alpha_*
    double convex_discount_margin = -HUGE_VAL;  // min_t alpha (1-theta) xi_m - delta_h
    bool convex_holds = false;

    // Branch (ii): alpha < (1 - (q/2) gamma_lower) / (1 - gamma_lower),
    // delta_h <= alpha gamma_lower xi_m.
    double concave_alpha_limit = HUGE_VAL;
    double concave_alpha_margin = -HUGE_VAL;     // limit - alpha
    double concave_discount_margin = -HUGE_VAL;  // min_t alpha gamma_lower xi_m - delta_h
    bool concave_holds = false;
};

/// Evaluate both sufficient conditions on a 1024-point grid over (0, horizon].
/// With `terminal_n_min`, a satisfied branch (ii) selects E_T instead of E^0.
inline Prop2Report check_prop2(const Scenario& sc, const EconomicModel& econ, double horizon,
                               bool terminal_n_min = false) {
    sc.validate();
    econ.validate();
    const auto ext = extremal_times(sc);
    if (ext.upper && horizon > *ext.upper * (1.0 + 1e-9))
        throw DomainError("check_prop2: horizon exceeds the maximal exit time");
    const auto ref = reference_envelopes(sc, horizon);

    Prop2Report rep;
    const auto& g = sc.growth;
    const double c = sc.params.half_q();
    const double theta = g.theta();
    const double gl = g.gamma_lower();

    double min_convex = HUGE_VAL, min_concave = HUGE_VAL;
    for (int i = 1; i <= kHypothesisGrid; ++i) {
        const double t = horizon * i / kHypothesisGrid;
        const double xm = xi_m(sc, ref, std::min(t, ref.upper.validity_end));
        const double dh = delta_h(econ, sc.env, t);
        min_convex = std::min(min_convex, econ.alpha * (1.0 - theta) * xm - dh);
        min_concave = std::min(min_concave, econ.alpha * gl * xm - dh);
    }

    rep.convex_applicable = g.is_power_family() && theta > 0.0;
    if (rep.convex_applicable) {
        try {
            const double bs = b_star(sc).b_star;
            rep.alpha_star = 1.0 + (bs - c) * (1.0 - theta);
            rep.convex_alpha_margin = econ.alpha - *rep.alpha_star;
            rep.convex_discount_margin = min_convex;
            rep.convex_holds = rep.convex_alpha_margin > 0.0 && min_convex >= 0.0;
        } catch (const Undefined&) {
        }
    }
    if (gl < 1.0) {
        rep.concave_alpha_limit = (1.0 - c * gl) / (1.0 - gl);
        rep.concave_alpha_margin = rep.concave_alpha_limit - econ.alpha;
        rep.concave_discount_margin = min_concave;
        rep.concave_holds = rep.concave_alpha_margin > 0.0 && min_concave >= 0.0;
    }

    if (terminal_n_min)
        rep.branch = rep.concave_holds ? Prop2Branch::ETOptimal : Prop2Branch::None;
    else if (rep.convex_holds)
        rep.branch = Prop2Branch::E0Optimal;
    else if (rep.concave_holds)
        rep.branch = Prop2Branch::EsupOptimal;
    return rep;
}

//---------------------------------------------------------------------------//
// Canonical comparison
//---------------------------------------------------------------------------//

/// Feasible over [0, horizon]: no early stop (an exit exactly at the horizon
/// is allowed).
inline bool feasible_to(const Trajectory& tr, double horizon) {
    if (tr.termination == Termination::Horizon)
        return true;
    return tr.termination == Termination::ExitPoint && tr.validity_end >= horizon * (1.0 - 1e-9);
}

struct CanonicalEntry {
    std::string name;
    Policy policy;
    std::optional<double> value;  // empty when infeasible over the horizon
};

struct CanonicalComparison {
    std::vector<CanonicalEntry> entries;  // e0, et, esup, zero, max
    bool e0_dominates = false;            // E0 strictly beats every other feasible canonical
    bool e0_dominated = false;            // some canonical strictly beats E0

    std::optional<double> value(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name)
                return e.value;
        return std::nullopt;
    }
    std::map<std::string, std::optional<double>> values() const {
        std::map<std::string, std::optional<double>> m;
        for (const auto& e : entries)
            m[e.name] = e.value;
        return m;
    }
};

inline std::vector<CanonicalEntry> canonical_policies(const Scenario& sc, double horizon) {
    std::vector<CanonicalEntry> out;
    out.push_back({"e0", build_policy(sc, CanonicalKind::E0), std::nullopt});
    try {
        out.push_back({"et", build_policy(sc, CanonicalKind::ET, horizon), std::nullopt});
    } catch (const DomainError&) {
    }
    out.push_back({"esup", build_policy(sc, CanonicalKind::Esup), std::nullopt});
    out.push_back({"zero", Policy::zero(), std::nullopt});
    out.push_back({"max", Policy::max(sc.params), std::nullopt});
    return out;
}

/// Objective of every canonical policy over [0, horizon]; a strict win is a
/// relative margin above 1e-9.
inline CanonicalComparison compare_canonicals(const Scenario& sc, const EconomicModel& econ,
                                              double horizon, double step = 0.0) {
    CanonicalComparison cmp;
    cmp.entries = canonical_policies(sc, horizon);
    IntegrateOptions opt;
    opt.step = step > 0.0 ? step : horizon / kDefaultSteps;
    for (auto& e : cmp.entries) {
        try {
            const auto tr = integrate(sc, e.policy, horizon, opt);
            if (feasible_to(tr, horizon))
                e.value = objective(sc, econ, tr);
        } catch (const InfeasibleBoundary&) {
        }
    }
    const auto e0 = cmp.value("e0");
    if (e0) {
        bool all_below = true, any_above = false;
        int others = 0;
        for (const auto& e : cmp.entries) {
            if (e.name == "e0" || e.name == "max" || !e.value)
                continue;  // max coincides with e0 once n_min is reached
            ++others;
            const double tol = 1e-9 * std::max(std::abs(*e0), std::abs(*e.value));
            if (*e.value >= *e0 - tol)
                all_below = false;
            if (*e.value > *e0 + tol)
                any_above = true;
        }
        cmp.e0_dominates = others > 0 && all_below;
        cmp.e0_dominated = any_above;
    }
    return cmp;
}

//---------------------------------------------------------------------------//
// Brute-force search over piecewise-constant policies
//---------------------------------------------------------------------------//

inline constexpr std::size_t kMaxCandidates = 59049;  // 3^10

struct SearchOptions {
    int intervals = 8;
    /// Control levels per interval; empty selects {0, e_max, hold}.
    std::vector<Level> levels;
    /// Keep only candidates ending with n(T) = n_min.
    bool terminal_n_min = false;
    /// Step used while ranking candidates; 0 selects horizon / 1024.
    double search_step = 0.0;
    /// Step for the winner and canonical re-evaluation; 0 selects horizon / 4096.
    double final_step = 0.0;
    /// Worker threads; 0 uses the hardware concurrency.
    unsigned threads = 0;
    /// Record every candidate's value in the result.
    bool keep_candidates = false;
};

/// {0, e_max, hold} or the five-level rate grid {0, e/4, e/2, 3e/4, e}.
inline std::vector<Level> default_levels(const StandParams& p, bool fine = false) {
    if (fine)
        return {Level::of_rate(0.0), Level::of_rate(0.25 * p.e_max), Level::of_rate(0.5 * p.e_max),
                Level::of_rate(0.75 * p.e_max), Level::of_rate(p.e_max)};
    return {Level::of_rate(0.0), Level::of_rate(p.e_max), Level::hold()};
}

inline std::string level_label(const Level& l, const StandParams& p) {
    if (l.is_hold())
        return "hold";
    if (l.rate == 0.0)
        return "0";
    if (l.rate == p.e_max)
        return "max";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", l.rate);
    return buf;
}

struct CandidateRecord {
    std::string label;
    bool feasible = false;
    double value = 0.0;
};

struct SearchResult {
    Policy best_policy;
    std::string best_label;
    double best_value = -HUGE_VAL;
    std::map<std::string, std::optional<double>> canonical_values;
    std::optional<Prop2Report> condition_report;
    double gap = 0.0;  // best_value - max canonical value
    std::size_t enumerated = 0;  // piecewise candidates, excluding canonicals
    std::size_t evaluated = 0;
    std::size_t feasible = 0;
    std::vector<CandidateRecord> candidates;
};

namespace detail {

struct Scored {
    bool feasible = false;
    double value = -HUGE_VAL;
    std::vector<double> harvest;  // cumulative harvest at the interval ends
};

inline Scored score(const Scenario& sc, const EconomicModel& econ, const Policy& pol,
                    double horizon, double step, int intervals, bool terminal) {
    Scored out;
    IntegrateOptions opt;
    opt.step = step;
    Trajectory tr;
    try {
        tr = integrate(sc, pol, horizon, opt);
    } catch (const InfeasibleBoundary&) {
        return out;
    }
    if (!feasible_to(tr, horizon))
        return out;
    if (terminal && std::abs(tr.back().n - sc.params.n_min) > 1e-6 * sc.params.n_min)
        return out;
    out.feasible = true;
    out.value = objective(sc, econ, tr);
    out.harvest.reserve(intervals);
    for (int k = 1; k <= intervals; ++k)
        out.harvest.push_back(sc.initial.n - tr.state_at(horizon * k / intervals).n);
    return out;
}

/// True when a should replace b: higher value, or a tie broken toward the
/// larger cumulative harvest at the earliest differing interval end.
inline bool better(const Scored& a, const Scored& b) {
    if (!a.feasible)
        return false;
    if (!b.feasible)
        return true;
    const double tol = 1e-12 * std::max(std::abs(a.value), std::abs(b.value));
    if (a.value > b.value + tol)
        return true;
    if (a.value < b.value - tol)
        return false;
    for (std::size_t k = 0; k < std::min(a.harvest.size(), b.harvest.size()); ++k) {
        const double ht = 1e-9 * std::max(1.0, std::abs(b.harvest[k]));
        if (a.harvest[k] > b.harvest[k] + ht)
            return true;
        if (a.harvest[k] < b.harvest[k] - ht)
            return false;
    }
    return false;
}

} // namespace detail

/// Exhaustive search over all level assignments on `intervals` equal
/// intervals, plus the canonical policies. Candidates that leave the
/// validity domain before the horizon are discarded.
inline SearchResult brute_force(const Scenario& sc, const EconomicModel& econ, double horizon,
                                SearchOptions opt = {}) {
    sc.validate();
    econ.validate();
    if (opt.intervals < 1 || opt.intervals > 10)
        throw DomainError("brute_force: intervals must lie in [1, 10]");
    if (opt.levels.empty())
        opt.levels = default_levels(sc.params);
    const double search_step = opt.search_step > 0.0 ? opt.search_step : horizon / 1024.0;
    const double final_step = opt.final_step > 0.0 ? opt.final_step : horizon / kDefaultSteps;

    const std::size_t L = opt.levels.size();
    std::size_t count = 1;
    for (int i = 0; i < opt.intervals; ++i) {
        count *= L;
        if (count > kMaxCandidates)
            throw DomainError("brute_force: more than 3^10 candidates requested");
    }

    // Enumerated candidates first, then canonicals.
    std::vector<Policy> policies;
    std::vector<std::string> labels;
    policies.reserve(count + 5);
    std::vector<double> breaks;
    for (int k = 1; k < opt.intervals; ++k)
        breaks.push_back(horizon * k / opt.intervals);
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::vector<Level> lv(opt.intervals);
        std::string label;
        std::size_t code = idx;
        for (int k = opt.intervals - 1; k >= 0; --k) {
            lv[k] = opt.levels[code % L];
            code /= L;
        }
        for (int k = 0; k < opt.intervals; ++k)
            label += (k ? "|" : "") + level_label(lv[k], sc.params);
        policies.push_back(Policy::piecewise(breaks, std::move(lv)));
        labels.push_back(std::move(label));
    }
    const auto canon = canonical_policies(sc, horizon);
    for (const auto& c : canon) {
        policies.push_back(c.policy);
        labels.push_back(c.name);
    }

    std::vector<detail::Scored> scored(policies.size());
    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(policies.size()));
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < policies.size(); i += stride)
            scored[i] = detail::score(sc, econ, policies[i], horizon, search_step, opt.intervals,
                                      opt.terminal_n_min);
    };
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::future<void>> fs;
        for (unsigned t = 0; t < threads; ++t)
            fs.push_back(std::async(std::launch::async, work, t, threads));
        for (auto& f : fs)
            f.get();
    }

    SearchResult res;
    res.enumerated = count;
    res.evaluated = policies.size();
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (scored[i].feasible)
            ++res.feasible;
        if (opt.keep_candidates)
            res.candidates.push_back({labels[i], scored[i].feasible, scored[i].value});
        if (!best || detail::better(scored[i], scored[*best]))
            best = i;
    }
    if (!best || !scored[*best].feasible)
        throw NoFeasiblePolicy("brute_force: every candidate leaves the validity domain");

    // Re-evaluate the winner and the canonicals at the fine step.
    auto fine = [&](std::size_t i) {
        return detail::score(sc, econ, policies[i], horizon, final_step, opt.intervals,
                             opt.terminal_n_min);
    };
    detail::Scored best_fine = fine(*best);
    std::size_t best_idx = *best;
    double best_canon = -HUGE_VAL;
    for (std::size_t c = 0; c < canon.size(); ++c) {
        const std::size_t i = count + c;
        const auto s = fine(i);
        res.canonical_values[labels[i]] =
            s.feasible ? std::optional<double>(s.value) : std::nullopt;
        if (s.feasible)
            best_canon = std::max(best_canon, s.value);
        if (detail::better(s, best_fine)) {
            best_fine = s;
            best_idx = i;
        }
    }
    res.best_policy = policies[best_idx];
    res.best_label = labels[best_idx];
    res.best_value = best_fine.value;
    res.gap = best_canon > -HUGE_VAL ? res.best_value - best_canon : 0.0;
    try {
        res.condition_report = check_prop2(sc, econ, horizon, opt.terminal_n_min);
    } catch (const DomainError&) {
    }
    return res;
}

} // namespace stand
