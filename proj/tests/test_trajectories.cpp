#include <catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"

using namespace stand;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// t^0 from its defining equation, with Simpson quadrature and plain bisection.
double t_sup0_oracle(const Scenario& sc) {
    const auto& p = sc.params;
    const double r0 = sc.initial_rdi();
    const double rhs = fixtures::simpson(
        [&](double u) { return std::pow(u, 2.0 / p.q - 1.0) / sc.growth.value(u); }, r0, 1.0);
    const double factor = p.half_q() * std::pow(sc.initial.n, 2.0 / p.q - 1.0) *
                          std::pow(p.A, 2.0 / p.q);
    return fixtures::root([&](double t) { return factor * sc.env.energy(0.0, t) - rhs; }, 0.0,
                          p.t_star);
}

/// T^0 from the constant-r relation.
double t_cap0_oracle(const Scenario& sc, double t0) {
    const auto& p = sc.params;
    const double c = 1.0 - 2.0 / p.q;
    const double need = (std::pow(p.n_min, c) - std::pow(sc.initial.n, c)) /
                        (std::pow(p.A, 2.0 / p.q) * (1.0 - p.half_q()));
    return fixtures::root([&](double t) { return sc.env.energy(t0, t) - need; }, t0, p.t_star);
}

} // namespace

TEST_CASE("time_to_count examples") {
    StandParams p;
    p.e_max = 40.0;
    CHECK(time_to_count(p, 1000.0, 600.0) == 10.0);
    CHECK(time_to_count(p, 700.0, 700.0) == 0.0);
    CHECK_THROWS_AS(time_to_count(p, 600.0, 1000.0), DomainError);
}

TEST_CASE("t_sup0 matches its defining equation") {
    for (const auto& sc : {fixtures::power(0.5), fixtures::power(0.2), fixtures::fagacees(),
                           fixtures::linear()}) {
        INFO(sc.growth.name());
        CHECK_THAT(t_sup0(sc), WithinRel(t_sup0_oracle(sc), 1e-8));
    }
}

TEST_CASE("t_sup0 for linear growth has a closed form") {
    const auto sc = fixtures::linear();
    const auto& p = sc.params;
    const double c = 1.0 - p.half_q();
    const double s_full = p.s_at_full_density(sc.initial.n);
    const double t = fixtures::root(
        [&](double T) {
            return std::pow(sc.initial.s, c) + p.A * c * sc.env.energy(0.0, T) - std::pow(s_full, c);
        },
        0.0, p.t_star);
    CHECK_THAT(t_sup0(sc), WithinRel(t, 1e-9));
}

TEST_CASE("t_sup0 vanishes as the initial density approaches 1") {
    auto sc = fixtures::power(0.5);
    sc.initial.s = sc.params.s_at_full_density(sc.initial.n) * (1.0 - 1e-9);
    CHECK(t_sup0(sc) < 1e-6);
}

TEST_CASE("t_sup0 reports no crossing when energy is insufficient") {
    const auto sc = fixtures::power(0.5, 0.01);
    CHECK_THROWS_AS(t_sup0(sc), NoCrossing);
}

TEST_CASE("t_cap0 matches the constant-r relation and the integrator") {
    for (const auto& sc : {fixtures::power(0.5), fixtures::fagacees(), fixtures::linear()}) {
        INFO(sc.growth.name());
        const double t0 = t_sup0(sc);
        const double T0 = t_cap0(sc);
        CHECK(t0 < T0);
        CHECK_THAT(T0, WithinRel(t_cap0_oracle(sc, t0), 1e-9));
        const auto tr = integrate(sc, build_policy(sc, CanonicalKind::Esup), sc.params.t_star);
        REQUIRE(tr.first_event(EventKind::ExitPoint));
        CHECK_THAT(*tr.first_event(EventKind::ExitPoint), WithinAbs(T0, 1e-5));
    }
}

TEST_CASE("t_cap0 edge cases") {
    auto sc = fixtures::power(0.5);
    sc.initial.n = sc.params.n_min;
    sc.initial.s = 0.2;
    CHECK_THAT(t_cap0(sc), WithinAbs(t_sup0(sc), 1e-9));

    CHECK(t_cap0(fixtures::power(0.5, 10.0)) < t_cap0(fixtures::power(0.5, 5.0)));
    CHECK_THROWS_AS(t_cap0(fixtures::power(0.5, 1.0)), NoReach);
}

TEST_CASE("build_policy: E0") {
    auto sc = fixtures::power(0.5);
    sc.params.e_max = 40.0;
    sc.params.n_min = 400.0;
    sc.initial = {0.0, 0.02, 1000.0};
    const auto e0 = build_policy(sc, CanonicalKind::E0);
    CHECK(e0.kind() == PolicyKind::E0);
    CHECK(e0.level_at(0.0).rate == 40.0);
    CHECK(e0.level_at(14.999).rate == 40.0);
    CHECK(e0.level_at(15.0).rate == 0.0);
    CHECK(e0.breakpoints() == std::vector<double>{15.0});
}

TEST_CASE("build_policy: E_T branches") {
    const auto sc = fixtures::power(0.5);
    const double t0n = time_to_count(sc.params, sc.initial.n, sc.params.n_min);
    const auto e0 = build_policy(sc, CanonicalKind::E0);

    const auto same = build_policy(sc, CanonicalKind::ET, t0n);
    CHECK(same.levels() == e0.levels());
    CHECK(same.breakpoints() == e0.breakpoints());

    // Short horizon: idle, then thin at e_max to reach n_min at T.
    const double T_short = t0n + 0.5 * t_sup0(sc);
    const auto short_pol = build_policy(sc, CanonicalKind::ET, T_short);
    CHECK(short_pol.level_at(0.0).rate == 0.0);
    CHECK_THAT(short_pol.breakpoints().front(), WithinAbs(T_short - t0n, 1e-12));

    // Long horizon: boundary arc until t_*, then e_max.
    const double T_long = 30.0;
    const auto long_pol = build_policy(sc, CanonicalKind::ET, T_long);
    CHECK(long_pol.level_at(0.0).is_hold());
    const double ts = long_pol.breakpoints().front();
    const double n_arc = boundary_arc_count(sc, t_sup0(sc), sc.initial.n, ts);
    CHECK_THAT((T_long - ts) * sc.params.e_max, WithinRel(n_arc - sc.params.n_min, 1e-8));

    for (double T : {T_short, T_long}) {
        const auto tr = integrate(sc, build_policy(sc, CanonicalKind::ET, T), T);
        INFO("T=" << T);
        CHECK_THAT(tr.back().n, WithinAbs(sc.params.n_min, 1e-6));
        CHECK_THAT(tr.validity_end, WithinAbs(T, 1e-9));
    }

    const double T0 = t_cap0(sc);
    CHECK(build_policy(sc, CanonicalKind::ET, T0).level_at(0.0).is_hold());
    CHECK(build_policy(sc, CanonicalKind::ET, T0).breakpoints().empty());
    CHECK_THROWS_AS(build_policy(sc, CanonicalKind::ET, T0 * 1.01), DomainError);
    CHECK_THROWS_AS(build_policy(sc, CanonicalKind::ET, 0.0), DomainError);
}

TEST_CASE("extremal times: linear growth makes them coincide") {
    const auto sc = fixtures::linear();
    const auto ext = extremal_times(sc);
    REQUIRE(ext.lower);
    REQUIRE(ext.upper);
    const auto& p = sc.params;
    const double c = 1.0 - p.half_q();
    const double T = fixtures::root(
        [&](double t) {
            return std::pow(sc.initial.s, c) + p.A * c * sc.env.energy(0.0, t) -
                   std::pow(p.s_bar(), c);
        },
        0.0, p.t_star);
    CHECK_THAT(*ext.lower, WithinRel(T, 1e-9));
    CHECK_THAT(*ext.upper, WithinRel(T, 1e-9));
    CHECK_FALSE(ext.lower_is_heuristic);
}

TEST_CASE("extremal times bracket every exit time") {
    const auto sc = fixtures::power(0.3);
    const auto ext = extremal_times(sc);
    REQUIRE(ext.lower);
    REQUIRE(ext.upper);
    CHECK(*ext.lower <= *ext.upper);
    CHECK(extremal_times(fixtures::fagacees()).lower_is_heuristic);

    std::mt19937_64 rng(5);
    IntegrateOptions opt;
    opt.saturate = true;
    int exits = 0;
    const double tol = 1e-4 * *ext.upper;
    for (int i = 0; i < 200; ++i) {
        const auto tr = integrate(sc, random_policy(sc.params, sc.params.t_star, rng),
                                  sc.params.t_star, opt);
        if (const auto t = tr.first_event(EventKind::ExitPoint)) {
            ++exits;
            CHECK(*t >= *ext.lower - tol);
            CHECK(*t <= *ext.upper + tol);
        }
    }
    CHECK(exits > 100);
}

TEST_CASE("characteristic times invariants") {
    const auto sc = fixtures::power(0.5);
    const auto ct = characteristic_times(sc, 30.0);
    CHECK(ct.t0_n == (sc.initial.n - sc.params.n_min) / sc.params.e_max);
    REQUIRE(ct.t_sup0);
    REQUIRE(ct.t_cap0);
    CHECK(*ct.t_sup0 < *ct.t_cap0);
    CHECK(*ct.t_lower <= *ct.t_upper);
    CHECK(*ct.t_upper == *ct.t_cap0);
    REQUIRE(ct.t_star_switch);
    CHECK(*ct.t_star_switch == build_policy(sc, CanonicalKind::ET, 30.0).breakpoints().front());

    const auto low = characteristic_times(fixtures::power(0.5, 1.0));
    CHECK(low.t_sup0);
    CHECK_FALSE(low.t_cap0);
    CHECK_FALSE(low.t_upper);
    CHECK_FALSE(low.t_lower);
}

TEST_CASE("validity diagnostic verdicts") {
    CHECK(validity_diagnostic(fixtures::power(0.5)).verdict == ExitVerdict::Reachable);
    CHECK(validity_diagnostic(fixtures::power(0.5, 1.0)).verdict == ExitVerdict::Unreachable);
    CHECK(validity_diagnostic(fixtures::power(0.5, 2.0)).verdict == ExitVerdict::Indeterminate);
    CHECK(to_string(ExitVerdict::Unreachable) == "exit unreachable");
}

TEST_CASE("power growth closed form along integrated trajectories") {
    const auto sc = fixtures::power(0.5);
    const auto& p = sc.params;
    const double theta = 0.5;
    const double c = 1.0 - p.half_q() * (1.0 - theta);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 10; ++i) {
        RandomPolicyOptions ro;
        ro.allow_hold = false;
        const auto pol = random_policy(p, 60.0, rng, ro);
        const auto tr = integrate(sc, pol, 60.0);
        const double end = tr.validity_end;
        if (end < 1.0)
            continue;
        // n from the policy alone: piecewise linear, clamped at n_min.
        auto n_of = [&](double t) {
            double n = sc.initial.n, a = 0.0;
            for (std::size_t k = 0; k <= pol.breakpoints().size(); ++k) {
                const double b = std::min(pol.segment_end(k), t);
                n -= pol.level(k).rate * (b - a);
                if (n <= p.n_min || b >= t)
                    break;
                a = b;
            }
            return std::max(n, p.n_min);
        };
        for (double t : {0.25 * end, 0.5 * end, end}) {
            const double I = fixtures::simpson(
                [&](double u) { return sc.env.V(u) / std::pow(n_of(u), theta); }, 0.0, t, 200000);
            const double s = std::pow(std::pow(sc.initial.s, c) + std::pow(p.A, 1.0 - theta) * c * I,
                                      1.0 / c);
            INFO("policy " << i << " t=" << t);
            CHECK(fixtures::rel_err(tr.state_at(t).s, s) <= 1e-5);
        }
    }
}
