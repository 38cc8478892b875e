// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "analysis.hpp"
#include "dynamics.hpp"
#include "optimizer.hpp"
#include "policy.hpp"
#include "trajectories.hpp"

namespace stand::io {

using json = nlohmann::ordered_json;

inline const char* kTrajectoryHeader = "t,s,n,r,e,h";

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Trajectory as CSV with the fixed header `t,s,n,r,e,h`, h being h0(t).
inline void write_trajectory_csv(std::ostream& out, const Scenario& sc, const Trajectory& tr) {
    out << kTrajectoryHeader << '\n';
    for (const auto& x : tr.samples) {
        out << format_number(x.t) << ',' << format_number(x.s) << ',' << format_number(x.n) << ','
            << format_number(x.r) << ',' << format_number(x.e) << ','
            << format_number(sc.env.h0(x.t)) << '\n';
    }
}

inline json optional_time(const std::optional<double>& v) {
    return v ? json(*v) : json("unreachable");
}

inline json to_json(const Trajectory& tr) {
    json events = json::array();
    for (const auto& ev : tr.events)
        events.push_back({{"t", ev.t}, {"kind", to_string(ev.kind)}});
    return {{"horizon", tr.horizon},
            {"validity_end", tr.validity_end},
            {"termination", to_string(tr.termination)},
            {"samples", tr.samples.size()},
            {"events", events}};
}

inline json to_json(const Policy& p) {
    json levels = json::array();
    for (const auto& l : p.levels())
        levels.push_back(l.is_hold() ? json("hold") : json(l.rate));
    json out = {{"kind", to_string(p.kind())}, {"breakpoints", p.breakpoints()}, {"levels", levels}};
    if (std::isfinite(p.target_time()))
        out["target_time"] = p.target_time();
    return out;
}

inline json to_json(const CharacteristicTimes& ct) {
    json out = {{"t0_n", ct.t0_n},
                {"t_sup0", optional_time(ct.t_sup0)},
                {"t_cap0", optional_time(ct.t_cap0)},
                {"t_lower", optional_time(ct.t_lower)},
                {"t_upper", optional_time(ct.t_upper)},
                {"lower_is_heuristic", ct.lower_is_heuristic}};
    if (ct.et_horizon) {
        out["et_horizon"] = *ct.et_horizon;
        out["t_star_switch"] = optional_time(ct.t_star_switch);
    }
    return out;
}

inline json to_json(const ValidityDiagnostic& d) {
    return {{"verdict", to_string(d.verdict)},
            {"forced_exit_margin", d.forced_exit_margin},
            {"no_exit_margin", d.no_exit_margin}};
}

inline json to_json(const HypothesisCheck& h) {
    return {{"name", h.name},
            {"pass", h.pass},
            {"witness", h.witness},
            {"margin", h.margin},
            {"note", h.note}};
}

inline json to_json(const BoundReport& r) {
    json hyp = json::array();
    for (const auto& h : r.hypotheses)
        hyp.push_back(to_json(h));
    json xi = json::array();
    for (const auto& [t, v] : r.xi_m)
        xi.push_back({t, v});
    json viol = json::array();
    for (const auto& v : r.envelope_violations)
        viol.push_back({{"t", v.t}, {"quantity", v.quantity}, {"lhs", v.lhs}, {"rhs", v.rhs}});
    return {{"ok", r.ok()},
            {"hypotheses", hyp},
            {"b_star", r.b_star ? json(*r.b_star) : json(nullptr)},
            {"a_star", r.a_star ? json(*r.a_star) : json(nullptr)},
            {"b_direct", r.b_direct},
            {"b_reversed", r.b_reversed},
            {"xi_m", xi},
            {"trajectories", r.trajectories},
            {"checks", r.checks},
            {"violation_count", r.envelope_violations.size()},
            {"violations", viol}};
}

inline json to_json(const Prop2Report& r) {
    auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"branch", to_string(r.branch)},
            {"convex_applicable", r.convex_applicable},
            {"alpha_star", r.alpha_star ? json(*r.alpha_star) : json(nullptr)},
            {"convex_alpha_margin", finite(r.convex_alpha_margin)},
            {"convex_discount_margin", finite(r.convex_discount_margin)},
            {"convex_holds", r.convex_holds},
            {"concave_alpha_limit", finite(r.concave_alpha_limit)},
            {"concave_alpha_margin", finite(r.concave_alpha_margin)},
            {"concave_discount_margin", finite(r.concave_discount_margin)},
            {"concave_holds", r.concave_holds}};
}

inline json to_json(const SearchResult& r) {
    json canon = json::object();
    for (const auto& [name, v] : r.canonical_values)
        canon[name] = v ? json(*v) : json("infeasible");
    return {{"best_label", r.best_label},
            {"best_value", r.best_value},
            {"best_policy", to_json(r.best_policy)},
            {"canonical_values", canon},
            {"gap", r.gap},
            {"enumerated", r.enumerated},
            {"evaluated", r.evaluated},
            {"feasible", r.feasible},
            {"condition_report",
             r.condition_report ? to_json(*r.condition_report) : json(nullptr)}};
}

inline void write_candidates_csv(std::ostream& out, const SearchResult& r) {
    out << "label,feasible,value\n";
    for (const auto& c : r.candidates)
        out << c.label << ',' << (c.feasible ? 1 : 0) << ','
            << (c.feasible ? format_number(c.value) : std::string("nan")) << '\n';
}

} // namespace stand::io
