#include <catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"

using namespace stand;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Scenario max_example() {
    Scenario sc = fixtures::power(0.5);
    sc.params.e_max = 40.0;
    sc.initial = {0.0, 0.02, 1000.0};
    sc.validate();
    return sc;
}

} // namespace

TEST_CASE("rhs examples") {
    const auto sc = fixtures::power(0.3);
    const double s = 0.05;
    const StandState on_boundary{3.0, s, sc.params.n_at_full_density(s)};
    const auto d = rhs(sc, on_boundary, 7.0);
    CHECK_THAT(d.ds, WithinRel(sc.env.V(3.0) / on_boundary.n, 1e-12));
    CHECK(d.dn == -7.0);
    CHECK(rhs(sc, {1.0, 0.03, 900.0}, 0.0).dn == 0.0);

    const auto lin = fixtures::linear();
    for (double n : {300.0, 800.0, 1400.0}) {
        const StandState x{2.0, 0.03, n};
        CHECK_THAT(rhs(lin, x, 0.0).ds,
                   WithinRel(lin.params.A * std::pow(0.03, 0.8) * lin.env.V(2.0), 1e-13));
    }
    CHECK_THROWS_AS(rhs(sc, {0.0, 0.02, 0.0}, 0.0), DomainError);
}

TEST_CASE("drdt examples") {
    const auto sc = fixtures::fagacees();
    const double s = 0.04;
    const StandState x{5.0, s, sc.params.n_at_full_density(s)};
    CHECK_THAT(drdt(sc, x, boundary_control(sc.params, sc.env, s, 5.0)), WithinAbs(0.0, 1e-10));
    CHECK(drdt(sc, {1.0, 0.02, 1000.0}, 0.0) > 0.0);
    // Chain rule: dr/dt = r (dn/dt / n + (q/2) ds/dt / s).
    const StandState y{1.0, 0.02, 1000.0};
    const auto d = rhs(sc, y, 30.0);
    const double r = rdi(sc.params, y.n, y.s);
    CHECK_THAT(drdt(sc, y, 30.0), WithinRel(r * (d.dn / y.n + 0.8 * d.ds / y.s), 1e-12));
}

TEST_CASE("zero policy keeps n constant and stops at r = 1") {
    const auto sc = fixtures::power(0.5);
    const auto tr = integrate(sc, Policy::zero(), 50.0);
    for (const auto& x : tr.samples)
        CHECK(x.n == sc.initial.n);
    CHECK(tr.termination == Termination::RdiViolation);
    REQUIRE(tr.first_event(EventKind::RdiHitOne));
    CHECK_THAT(*tr.first_event(EventKind::RdiHitOne), WithinAbs(t_sup0(sc), 1e-6));
    CHECK_THAT(tr.back().r, WithinAbs(1.0, 1e-12));
}

TEST_CASE("linear growth under zero cutting follows the closed form") {
    const auto sc = fixtures::linear(1.0);
    const auto& p = sc.params;
    const double c = 1.0 - p.half_q();
    const auto tr = integrate(sc, Policy::zero(), 100.0);
    REQUIRE(tr.samples.size() > 100);
    for (const auto& x : tr.samples) {
        const double closed = std::pow(std::pow(sc.initial.s, c) + p.A * c * sc.env.energy(0.0, x.t),
                                       1.0 / c);
        CHECK(fixtures::rel_err(x.s, closed) <= 1e-6);
    }
}

TEST_CASE("max policy depletes linearly") {
    const auto sc = max_example();
    const auto tr = integrate(sc, Policy::max(sc.params), 40.0);
    CHECK_THAT(tr.state_at(10.0).n, WithinAbs(600.0, 1e-9));
    REQUIRE(tr.first_event(EventKind::NMinHit));
    CHECK_THAT(*tr.first_event(EventKind::NMinHit),
               WithinAbs(time_to_count(sc.params, 1000.0, 200.0), 1e-9));
    CHECK_THAT(tr.back().n, WithinAbs(200.0, 1e-9));
}

TEST_CASE("integrated trajectories respect the state invariants") {
    for (const auto& sc : {fixtures::power(0.5), fixtures::power(0.2), fixtures::fagacees(),
                           fixtures::linear()}) {
        std::mt19937_64 rng(11);
        IntegrateOptions opt;
        opt.saturate = true;
        for (int i = 0; i < 40; ++i) {
            const auto tr = integrate(sc, random_policy(sc.params, 100.0, rng), 100.0, opt);
            const auto& S = tr.samples;
            for (std::size_t k = 0; k < S.size(); ++k) {
                CHECK(S[k].r <= 1.0 + 1e-6);
                CHECK(S[k].n >= sc.params.n_min - 1e-6);
                if (k == 0)
                    continue;
                CHECK(S[k].t > S[k - 1].t);
                CHECK(S[k].n <= S[k - 1].n + 1e-9);
                CHECK(S[k].s > S[k - 1].s);
                // g(r)/n is nondecreasing in t.
                CHECK(sc.growth.value(S[k].r) / S[k].n >=
                      sc.growth.value(S[k - 1].r) / S[k - 1].n * (1.0 - 1e-9));
            }
        }
    }
}

TEST_CASE("g(r(n,s))/n is decreasing in n at fixed s") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> us(0.005, 0.3), un(200.0, 3000.0);
    for (const auto& sc : {fixtures::power(0.5), fixtures::fagacees(), fixtures::linear()}) {
        for (int i = 0; i < 500; ++i) {
            const double s = us(rng);
            double n1 = un(rng), n2 = un(rng);
            if (n1 > n2)
                std::swap(n1, n2);
            const double r2 = rdi(sc.params, n2, s);
            if (r2 > 1.0 || n2 - n1 < 1e-6)
                continue;
            const double r1 = rdi(sc.params, n1, s);
            CHECK(sc.growth.value(r1) / n1 >= sc.growth.value(r2) / n2 * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("RK4 order: step halving shrinks the final-state error sixteenfold") {
    const auto sc = fixtures::power(0.5, 1.0);
    const Policy pol = Policy::piecewise({}, {Level::of_rate(20.0)});
    auto final_state = [&](double h) { return integrate(sc, pol, 20.0, h).back(); };
    const auto a = final_state(20.0 / 8), b = final_state(20.0 / 16), c = final_state(20.0 / 32);
    const double ratio = std::abs(a.s - b.s) / std::abs(b.s - c.s);
    INFO("ratio " << ratio);
    CHECK(ratio > 14.0);
    CHECK(ratio < 18.0);
}

TEST_CASE("boundary arc: Esup applies the boundary control and exits at (1, n_min)") {
    const auto sc = fixtures::power(0.5);
    const auto tr = integrate(sc, build_policy(sc, CanonicalKind::Esup), sc.params.t_star);
    const double t0 = t_sup0(sc);
    CHECK(tr.termination == Termination::ExitPoint);
    for (const auto& x : tr.samples) {
        if (x.t > t0 + 1e-9 && x.t < tr.validity_end) {
            CHECK_THAT(x.e, WithinRel(boundary_control(sc.params, sc.env, x.s, x.t), 1e-12));
            CHECK_THAT(x.r, WithinAbs(1.0, 1e-12));
        }
    }
    CHECK_THAT(tr.back().r, WithinAbs(1.0, 1e-6));
    CHECK_THAT(tr.back().n, WithinAbs(sc.params.n_min, 1e-6));
}

TEST_CASE("boundary arc requiring more than e_max is infeasible") {
    auto sc = fixtures::power(0.5);
    sc.params.e_max = 50.0;
    CHECK_THROWS_AS(integrate(sc, build_policy(sc, CanonicalKind::Esup), 60.0),
                    InfeasibleBoundary);
}

TEST_CASE("a rate below the boundary control leaves the domain unless saturated") {
    const auto sc = fixtures::power(0.5);
    const auto pol = Policy::piecewise({}, {Level::of_rate(5.0)});
    const auto strict = integrate(sc, pol, 30.0);
    CHECK(strict.termination == Termination::RdiViolation);
    CHECK(strict.first_event(EventKind::RdiHitOne));
    IntegrateOptions opt;
    opt.saturate = true;
    const auto sat = integrate(sc, pol, 30.0, opt);
    CHECK(sat.reached_horizon());
    CHECK_THAT(sat.back().r, WithinAbs(1.0, 1e-9));
}

TEST_CASE("leaving the boundary when the rate exceeds the boundary control") {
    const auto sc = fixtures::power(0.5);
    const auto pol = Policy::piecewise({10.0}, {Level::hold(), Level::of_rate(250.0)});
    const auto tr = integrate(sc, pol, 12.0);
    REQUIRE(tr.first_event(EventKind::BoundaryLeave));
    CHECK_THAT(*tr.first_event(EventKind::BoundaryLeave), WithinAbs(10.0, 1e-12));
    CHECK(tr.back().r < 1.0);
}

TEST_CASE("state_at interpolates between samples") {
    const auto sc = fixtures::power(0.5, 1.0);
    const auto pol = Policy::piecewise({7.3}, {Level::of_rate(30.0), Level::of_rate(0.0)});
    const auto coarse = integrate(sc, pol, 20.0, 20.0 / 256);
    const auto fine = integrate(sc, pol, 20.0, 20.0 / 8192);
    for (double t : {0.01, 3.3333, 7.3, 7.31, 12.777, 19.99}) {
        INFO("t=" << t);
        CHECK_THAT(coarse.state_at(t).s, WithinRel(fine.state_at(t).s, 1e-7));
        CHECK_THAT(coarse.state_at(t).n, WithinRel(fine.state_at(t).n, 1e-12));
    }
}

TEST_CASE("integrate preconditions") {
    const auto sc = fixtures::power(0.5);
    CHECK_THROWS_AS(integrate(sc, Policy::zero(), sc.params.t_star + 1.0), DomainError);
    CHECK_THROWS_AS(integrate(sc, Policy::piecewise({}, {Level::of_rate(1e6)}), 10.0), DomainError);
}

TEST_CASE("growth bias hook perturbs the basal-area rate") {
    const auto sc = fixtures::power(0.5, 1.0);
    IntegrateOptions opt;
    opt.growth_bias = 1.1;
    const auto a = integrate(sc, Policy::zero(), 10.0);
    const auto b = integrate(sc, Policy::zero(), 10.0, opt);
    CHECK(b.back().s > a.back().s);
}
