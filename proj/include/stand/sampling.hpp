// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "analysis.hpp"
#include "dynamics.hpp"
#include "model.hpp"
#include "policy.hpp"

namespace stand {

struct RandomPolicyOptions {
    int max_breakpoints = 8;
    bool allow_hold = true;
};

/// Random piecewise-constant policy on [0, horizon]: up to `max_breakpoints`
/// uniform breakpoints, levels drawn from {0, e_max, hold, uniform rate}.
/// Deterministic for a given engine state.
inline Policy random_policy(const StandParams& p, double horizon, std::mt19937_64& rng,
                            const RandomPolicyOptions& opt = {}) {
    std::uniform_int_distribution<int> count(0, opt.max_breakpoints);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, opt.allow_hold ? 3 : 2);

    std::vector<double> bps;
    const int k = count(rng);
    for (int i = 0; i < k; ++i)
        bps.push_back(horizon * unit(rng));
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end(),
                          [&](double a, double b) { return b - a < 1e-6 * horizon; }),
              bps.end());
    bps.erase(std::remove_if(bps.begin(), bps.end(), [](double b) { return !(b > 0.0); }),
              bps.end());

    std::vector<Level> levels;
    for (std::size_t i = 0; i <= bps.size(); ++i) {
        switch (pick(rng)) {
        case 0: levels.push_back(Level::of_rate(0.0)); break;
        case 1: levels.push_back(Level::of_rate(p.e_max)); break;
        case 2: levels.push_back(Level::of_rate(p.e_max * unit(rng))); break;
        default: levels.push_back(Level::hold()); break;
        }
    }
    return Policy::piecewise(std::move(bps), std::move(levels));
}

struct VerifyOptions {
    int policies = 100;
    std::uint64_t seed = 1;
    double horizon = 0.0;  // 0: t_star
    double step = 0.0;     // 0: horizon / 4096
    double growth_bias = 1.0;
    AuditOptions audit;
};

/// Audit `policies` random admissible trajectories (boundary saturation on)
/// against the reference envelopes.
inline BoundReport verify_random_policies(const Scenario& sc, const VerifyOptions& opt) {
    sc.validate();
    const double horizon = opt.horizon > 0.0 ? opt.horizon : sc.params.t_star;
    const double step = opt.step > 0.0 ? opt.step : horizon / kDefaultSteps;
    const auto ref = reference_envelopes(sc, horizon, step);
    AuditOptions audit = opt.audit;
    resolve_exponents(sc, audit);
    BoundReport rep = bound_report_header(sc, ref, audit);

    std::mt19937_64 rng(opt.seed);
    IntegrateOptions io;
    io.step = step;
    io.saturate = true;
    io.growth_bias = opt.growth_bias;
    for (int i = 0; i < opt.policies; ++i) {
        const Policy pol = random_policy(sc.params, horizon, rng);
        audit_into(sc, integrate(sc, pol, horizon, io), ref, audit, rep);
    }
    return rep;
}

} // namespace stand
