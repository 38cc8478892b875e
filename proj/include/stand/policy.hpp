// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace stand {

/// One control level. A Hold level cuts nothing while r < 1 and applies the
/// boundary control e_r(s,t) once the stand reaches r = 1.
struct Level {
    enum class Kind { Rate, Hold };
    Kind kind = Kind::Rate;
    double rate = 0.0;

    static Level of_rate(double e) { return {Kind::Rate, e}; }
    static Level hold() { return {Kind::Hold, 0.0}; }

    bool is_hold() const noexcept { return kind == Kind::Hold; }
    bool operator==(const Level&) const = default;
};

enum class PolicyKind { Zero, Max, E0, ET, Esup, PiecewiseConstant, BoundaryHold };

inline std::string to_string(PolicyKind k) {
    switch (k) {
    case PolicyKind::Zero: return "zero";
    case PolicyKind::Max: return "max";
    case PolicyKind::E0: return "e0";
    case PolicyKind::ET: return "et";
    case PolicyKind::Esup: return "esup";
    case PolicyKind::PiecewiseConstant: return "piecewise";
    case PolicyKind::BoundaryHold: return "hold";
    }
    return "unknown";
}

/// Thinning control e(t): piecewise-constant levels separated by strictly
/// increasing breakpoints. Level i applies on [breakpoints[i-1], breakpoints[i]).
class Policy {
  public:
    Policy() : Policy(PolicyKind::Zero, {}, {Level::of_rate(0.0)}) {}

    Policy(PolicyKind kind, std::vector<double> breakpoints, std::vector<Level> levels,
           double target_time = std::numeric_limits<double>::quiet_NaN())
        : kind_(kind), breakpoints_(std::move(breakpoints)), levels_(std::move(levels)),
          target_time_(target_time) {
        if (levels_.size() != breakpoints_.size() + 1)
            throw DomainError("policy: need exactly one more level than breakpoints");
        for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
            if (!std::isfinite(breakpoints_[i]) || breakpoints_[i] < 0.0)
                throw DomainError("policy: breakpoints must be finite and non-negative");
            if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1]))
                throw DomainError("policy: breakpoints must be strictly increasing");
        }
        for (const auto& l : levels_)
            if (!l.is_hold() && !(l.rate >= 0.0))
                throw DomainError("policy: rates must be >= 0");
    }

    static Policy zero() { return Policy(PolicyKind::Zero, {}, {Level::of_rate(0.0)}); }
    static Policy max(const StandParams& p) {
        return Policy(PolicyKind::Max, {}, {Level::of_rate(p.e_max)});
    }
    static Policy boundary_hold() { return Policy(PolicyKind::BoundaryHold, {}, {Level::hold()}); }
    static Policy piecewise(std::vector<double> breakpoints, std::vector<Level> levels) {
        return Policy(PolicyKind::PiecewiseConstant, std::move(breakpoints), std::move(levels));
    }

    /// Rates must not exceed e_max.
    void validate(const StandParams& p) const {
        for (const auto& l : levels_)
            if (!l.is_hold() && l.rate > p.e_max * (1.0 + 1e-12))
                throw DomainError("policy: rate " + std::to_string(l.rate) + " exceeds e_max");
    }

    PolicyKind kind() const noexcept { return kind_; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<Level>& levels() const noexcept { return levels_; }
    /// Horizon T for E_T policies, NaN otherwise.
    double target_time() const noexcept { return target_time_; }

    std::size_t segment_index(double t) const noexcept {
        return static_cast<std::size_t>(
            std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t) - breakpoints_.begin());
    }
    double segment_end(std::size_t i) const noexcept {
        return i < breakpoints_.size() ? breakpoints_[i] : HUGE_VAL;
    }
    const Level& level(std::size_t i) const noexcept { return levels_[i]; }
    const Level& level_at(double t) const noexcept { return levels_[segment_index(t)]; }

  private:
    PolicyKind kind_;
    std::vector<double> breakpoints_;
    std::vector<Level> levels_;
    double target_time_;
};

} // namespace stand
