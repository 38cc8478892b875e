// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include "errors.hpp"
#include "numerics.hpp"

namespace stand {

//---------------------------------------------------------------------------//
// Stand parameters and state
//---------------------------------------------------------------------------//

struct StandParams {
    double q = 1.6;         // Reineke exponent
    double A = 0.01;        // self-thinning coefficient, exp(-C0)
    double n_min = 200.0;   // minimum tree count
    double e_max = 100.0;   // maximum thinning rate (trees/year)
    double t_star = 150.0;  // model validity horizon (years)

    void validate() const {
        if (!(q > 1.0 && q < 2.0))
            throw DomainError("stand.q must satisfy 1 < q < 2 (got " + std::to_string(q) + ")");
        if (!(A > 0.0))
            throw DomainError("stand.A must be > 0");
        if (!(n_min > 0.0))
            throw DomainError("stand.n_min must be > 0");
        if (!(e_max > 0.0))
            throw DomainError("stand.e_max must be > 0");
        if (!(t_star > 0.0))
            throw DomainError("stand.t_star must be > 0");
        if (!std::isfinite(s_bar()) || !(s_bar() > 0.0))
            throw DomainError("s_bar = (A n_min)^(-2/q) is not finite");
    }

    double half_q() const noexcept { return 0.5 * q; }

    /// Largest admissible basal area, reached only at n = n_min, r = 1.
    double s_bar() const noexcept { return std::pow(A * n_min, -2.0 / q); }

    /// Tree count that puts a stand of basal area s exactly on r = 1.
    double n_at_full_density(double s) const noexcept { return 1.0 / (A * std::pow(s, half_q())); }

    /// Basal area at which a stand of n trees sits exactly on r = 1.
    double s_at_full_density(double n) const noexcept { return std::pow(A * n, -2.0 / q); }
};

struct StandState {
    double t = 0.0;
    double s = 0.0;
    double n = 0.0;
};

/// Relative density index A n s^(q/2).
inline double rdi(const StandParams& params, double n, double s) {
    if (!(n > 0.0) || !(s > 0.0))
        throw DomainError("rdi: n and s must be positive");
    return params.A * n * std::pow(s, params.half_q());
}

//---------------------------------------------------------------------------//
// Competition reduction function g
//---------------------------------------------------------------------------//

struct Fagacees {
    double p = 3.0;
};
struct Power {
    double theta = 0.3;
};
struct Linear {};

/// Concave competition reduction g(r) with g(0) = 0, g(1) = 1.
///
/// Elasticity bounds gamma_lower/gamma_upper bracket r g'(r)/g(r) on (0, 1).
/// All supported families have them in closed form; the Fagacees upper bound
/// tends to 1 as r -> 0 and is clamped at r = kGammaEps.
class GrowthFunction {
  public:
    using Variant = std::variant<Fagacees, Power, Linear>;

    static constexpr double kGammaEps = 1e-6;

    GrowthFunction() : GrowthFunction(Power{}) {}

    explicit GrowthFunction(Variant v) : variant_(std::move(v)) {
        if (const auto* f = std::get_if<Fagacees>(&variant_)) {
            if (!(f->p > 0.0))
                throw DomainError("growth.p must be > 0");
            gamma_lower_ = f->p / (1.0 + f->p);
            gamma_upper_ = f->p / (kGammaEps + f->p);
        } else if (const auto* pw = std::get_if<Power>(&variant_)) {
            if (!(pw->theta >= 0.0 && pw->theta < 1.0))
                throw DomainError("growth.theta must satisfy 0 <= theta < 1");
            gamma_lower_ = gamma_upper_ = 1.0 - pw->theta;
        } else {
            gamma_lower_ = gamma_upper_ = 1.0;
        }
    }

    static GrowthFunction fagacees(double p) { return GrowthFunction(Fagacees{p}); }
    static GrowthFunction power(double theta) { return GrowthFunction(Power{theta}); }
    static GrowthFunction linear() { return GrowthFunction(Linear{}); }

    const Variant& variant() const noexcept { return variant_; }

    /// True for g(r) = r^(1-theta), including the linear limit.
    bool is_power_family() const noexcept { return !std::holds_alternative<Fagacees>(variant_); }
    bool is_linear() const noexcept {
        if (std::holds_alternative<Linear>(variant_))
            return true;
        const auto* pw = std::get_if<Power>(&variant_);
        return pw && pw->theta == 0.0;
    }
    /// Exponent theta of the power family; 0 for Linear. Only meaningful when
    /// is_power_family().
    double theta() const noexcept {
        const auto* pw = std::get_if<Power>(&variant_);
        return pw ? pw->theta : 0.0;
    }

    std::string name() const {
        return std::visit(
            [](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Fagacees>)
                    return "fagacees";
                else if constexpr (std::is_same_v<T, Power>)
                    return "power";
                else
                    return "linear";
            },
            variant_);
    }

    // Unchecked evaluation; the integrator may probe r slightly above 1.
    double value(double r) const noexcept {
        return std::visit(
            [r](const auto& v) -> double {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Fagacees>)
                    return (1.0 + v.p) * r / (r + v.p);
                else if constexpr (std::is_same_v<T, Power>)
                    return r <= 0.0 ? 0.0 : std::pow(r, 1.0 - v.theta);
                else
                    return r;
            },
            variant_);
    }

    double derivative(double r) const noexcept {
        return std::visit(
            [r](const auto& v) -> double {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Fagacees>)
                    return (1.0 + v.p) * v.p / ((r + v.p) * (r + v.p));
                else if constexpr (std::is_same_v<T, Power>) {
                    if (v.theta == 0.0)
                        return 1.0;
                    return r <= 0.0 ? HUGE_VAL : (1.0 - v.theta) * std::pow(r, -v.theta);
                } else
                    return 1.0;
            },
            variant_);
    }

    double gamma_lower() const noexcept { return gamma_lower_; }
    double gamma_upper() const noexcept { return gamma_upper_; }

  private:
    Variant variant_;
    double gamma_lower_ = 0.0;
    double gamma_upper_ = 1.0;
};

inline void check_unit_interval(double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0))
        throw DomainError(std::string(what) + ": r must lie in [0, 1]");
}

inline double g_eval(const GrowthFunction& g, double r) {
    check_unit_interval(r, "g_eval");
    return g.value(r);
}

inline double g_prime(const GrowthFunction& g, double r) {
    check_unit_interval(r, "g_prime");
    return g.derivative(r);
}

/// d/dr [r / g(r)] = (g - r g') / g^2.
inline double script_g(const GrowthFunction& g, double r) {
    if (!(r > 0.0) || r > 1.0)
        throw DomainError("script_g: r must lie in (0, 1]");
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Fagacees>)
                return 1.0 / (1.0 + v.p);
            else if constexpr (std::is_same_v<T, Power>)
                return v.theta * std::pow(r, v.theta - 1.0);
            else
                return 0.0;
        },
        g.variant());
}

/// Elasticity r g'(r) / g(r).
inline double gamma(const GrowthFunction& g, double r) {
    if (!(r > 0.0) || r > 1.0)
        throw DomainError("gamma: r must lie in (0, 1]");
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Fagacees>)
                return v.p / (r + v.p);
            else if constexpr (std::is_same_v<T, Power>)
                return 1.0 - v.theta;
            else
                return 1.0;
        },
        g.variant());
}

/// Min/max of gamma sampled on a uniform grid over (eps, 1 - eps), widened by
/// a safety margin. Fallback for growth functions without closed-form bounds.
inline std::pair<double, double> sampled_gamma_bounds(const GrowthFunction& g, int points = 10000,
                                                      double eps = 1e-6, double margin = 1e-9) {
    double lo = HUGE_VAL;
    double hi = -HUGE_VAL;
    for (int i = 0; i < points; ++i) {
        const double r = eps + (1.0 - 2.0 * eps) * i / (points - 1);
        const double v = r * g.derivative(r) / g.value(r);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {std::max(lo - margin, 0.0), std::min(hi + margin, 1.0)};
}

//---------------------------------------------------------------------------//
// Environment: growth energy V(t) and dominant height h0(t)
//---------------------------------------------------------------------------//

struct Exponential {
    double v0 = 5.0;
    double lambda = 0.02;
};
struct Hyperbolic {
    double v0 = 5.0;
    double lambda = 0.02;
};
struct Saturating {
    double h_inf = 30.0;
    double tau = 40.0;
};

class Environment {
  public:
    using EnergyFamily = std::variant<Exponential, Hyperbolic>;
    using HeightFamily = std::variant<Saturating>;

    Environment() : Environment(Exponential{}, Saturating{}) {}

    Environment(EnergyFamily v, HeightFamily h0) : v_(std::move(v)), h0_(std::move(h0)) {
        std::visit(
            [this](const auto& f) {
                if (!(f.v0 > 0.0))
                    throw DomainError("environment.v0 must be > 0 (V positive)");
                if (!(f.lambda >= 0.0))
                    throw DomainError("environment.lambda must be >= 0 (V non-increasing)");
                weakly_decreasing_ = f.lambda == 0.0;
            },
            v_);
        const auto& s = std::get<Saturating>(h0_);
        if (!(s.h_inf > 0.0) || !(s.tau > 0.0))
            throw DomainError("environment.h_inf and environment.tau must be > 0");
    }

    const EnergyFamily& energy_family() const noexcept { return v_; }
    const HeightFamily& height_family() const noexcept { return h0_; }

    /// Set when V is constant: accepted, though not strictly decreasing.
    bool weakly_decreasing() const noexcept { return weakly_decreasing_; }

    double V(double t) const noexcept {
        return std::visit(
            [t](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Exponential>)
                    return f.v0 * std::exp(-f.lambda * t);
                else
                    return f.v0 / (1.0 + f.lambda * t);
            },
            v_);
    }

    /// Integral of V over [t0, t1] in closed form.
    double energy(double t0, double t1) const {
        if (!(t0 >= 0.0) || !(t1 >= t0))
            throw DomainError("energy: require 0 <= t0 <= t1");
        return std::visit(
            [t0, t1](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                const double dt = t1 - t0;
                if (f.lambda == 0.0)
                    return f.v0 * dt;
                if constexpr (std::is_same_v<T, Exponential>)
                    return f.v0 * std::exp(-f.lambda * t0) * -std::expm1(-f.lambda * dt) / f.lambda;
                else
                    return f.v0 / f.lambda * std::log1p(f.lambda * dt / (1.0 + f.lambda * t0));
            },
            v_);
    }

    double h0(double t) const noexcept {
        const auto& s = std::get<Saturating>(h0_);
        return s.h_inf * t / (t + s.tau);
    }

    double h0_prime(double t) const noexcept {
        const auto& s = std::get<Saturating>(h0_);
        return s.h_inf * s.tau / ((t + s.tau) * (t + s.tau));
    }

  private:
    EnergyFamily v_;
    HeightFamily h0_;
    bool weakly_decreasing_ = false;
};

inline double energy(const Environment& env, double t0, double t1) { return env.energy(t0, t1); }

/// Thinning rate that holds r = 1: (q/2) V(t) / s.
inline double boundary_control(const StandParams& params, const Environment& env, double s,
                               double t) {
    if (!(s > 0.0) || !(t >= 0.0))
        throw DomainError("boundary_control: require s > 0 and t >= 0");
    return params.half_q() * env.V(t) / s;
}

//---------------------------------------------------------------------------//
// Scenario
//---------------------------------------------------------------------------//

struct Scenario {
    StandParams params;
    GrowthFunction growth;
    Environment env;
    StandState initial;  // t = 0

    void validate() const {
        params.validate();
        if (initial.t != 0.0)
            throw DomainError("initial.t must be 0");
        if (!(initial.s > 0.0))
            throw DomainError("initial.s must be > 0");
        if (!(initial.n >= params.n_min))
            throw DomainError("initial.n must be >= stand.n_min");
        if (!(rdi(params, initial.n, initial.s) < 1.0))
            throw DomainError("initial.n and initial.s must satisfy rdi(n, s) < 1");
    }

    double initial_rdi() const { return rdi(params, initial.n, initial.s); }
};

} // namespace stand
