#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace stand;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SearchOptions coarse(int intervals = 4) {
    SearchOptions o;
    o.intervals = intervals;
    return o;
}

} // namespace

TEST_CASE("sufficient conditions select the expected branch") {
    const auto sc = fixtures::power(0.5);
    const double horizon = 30.0;

    const auto convex = check_prop2(sc, EconomicModel{1.0, 5.0, 0.0}, horizon);
    CHECK(convex.branch == Prop2Branch::E0Optimal);
    REQUIRE(convex.alpha_star);
    CHECK_THAT(*convex.alpha_star, WithinRel(1.0 + (b_star(sc).b_star - 0.8) * 0.5, 1e-12));
    CHECK(convex.convex_discount_margin > 0.0);

    const auto concave = check_prop2(sc, EconomicModel{1.0, 1.0, 0.0}, horizon);
    CHECK(concave.branch == Prop2Branch::EsupOptimal);
    CHECK_THAT(concave.concave_alpha_limit, WithinRel((1.0 - 0.8 * 0.5) / 0.5, 1e-14));

    CHECK(check_prop2(sc, EconomicModel{1.0, 1.0, 0.0}, horizon, true).branch ==
          Prop2Branch::ETOptimal);
    CHECK(check_prop2(sc, EconomicModel{1.0, 2.0, 0.0}, horizon).branch == Prop2Branch::None);

    const auto s3 = fixtures::power(0.3);
    const double a3 = 1.0 + (b_star(s3).b_star - 0.8) * 0.7;
    CHECK(check_prop2(s3, EconomicModel{1.0, a3 + 0.1, 0.0}, horizon).branch ==
          Prop2Branch::E0Optimal);

    CHECK_THROWS_AS(check_prop2(sc, EconomicModel{1.0, 1.0, 0.0}, t_cap0(sc) + 1.0), DomainError);
    CHECK(to_string(Prop2Branch::EsupOptimal) == "EsupOptimal");
}

TEST_CASE("canonical comparison in both regimes") {
    const auto sc = fixtures::power(0.5);
    const auto i = compare_canonicals(sc, EconomicModel{1.0, 5.0, 0.0}, 30.0);
    CHECK(i.e0_dominates);
    CHECK_FALSE(i.e0_dominated);
    const auto ii = compare_canonicals(sc, EconomicModel{1.0, 1.0, 0.0}, 30.0);
    CHECK(ii.e0_dominated);
    CHECK(*ii.value("esup") > *ii.value("e0"));
    CHECK(ii.values().size() == 5);
    // The zero policy hits r = 1 long before the horizon.
    CHECK_FALSE(ii.value("zero"));
}

TEST_CASE("enumeration counts") {
    const auto sc = fixtures::power(0.5);
    SearchOptions o;
    o.intervals = 1;
    o.levels = {Level::of_rate(0.0), Level::of_rate(sc.params.e_max)};
    o.keep_candidates = true;
    const auto res = brute_force(sc, EconomicModel{1.0, 1.0, 0.0}, 30.0, o);
    CHECK(res.enumerated == 2);
    CHECK(res.evaluated == 2 + res.canonical_values.size());
    CHECK(res.candidates.size() == res.evaluated);
    CHECK(res.gap >= 0.0);

    o.intervals = 11;
    CHECK_THROWS_AS(brute_force(sc, EconomicModel{}, 30.0, o), DomainError);
}

TEST_CASE("brute force confirms the canonical optimum in each regime") {
    const auto sc = fixtures::power(0.5);

    const EconomicModel convex{1.0, 5.0, 0.0};
    const auto r1 = brute_force(sc, convex, 30.0, coarse());
    REQUIRE(r1.canonical_values.at("e0"));
    const double e0 = *r1.canonical_values.at("e0");
    CHECK(r1.best_value <= e0 + 1e-4 * std::abs(e0));

    const EconomicModel concave{1.0, 1.0, 0.0};
    const auto r2 = brute_force(sc, concave, 30.0, coarse());
    REQUIRE(r2.canonical_values.at("esup"));
    const double esup = *r2.canonical_values.at("esup");
    CHECK(r2.best_value <= esup + 1e-4 * std::abs(esup));
    REQUIRE(r2.condition_report);
    CHECK(r2.condition_report->branch == Prop2Branch::EsupOptimal);

    SearchOptions term = coarse();
    term.terminal_n_min = true;
    const auto r3 = brute_force(sc, concave, 30.0, term);
    REQUIRE(r3.canonical_values.at("et"));
    const double et = *r3.canonical_values.at("et");
    CHECK(r3.best_value <= et + 1e-4 * std::abs(et));
}

TEST_CASE("finer interval grids never lose value") {
    const auto sc = fixtures::power(0.5);
    const EconomicModel m{1.0, 1.5, 0.01};
    double prev = -HUGE_VAL;
    for (int k : {1, 2, 4}) {
        const auto res = brute_force(sc, m, 24.0, coarse(k));
        INFO("intervals " << k);
        CHECK(res.best_value >= prev - 1e-9 * std::abs(prev));
        prev = res.best_value;
    }
}

TEST_CASE("a negligible harvest cap leaves nothing to optimize") {
    auto sc = fixtures::power(0.5, 1.0);
    sc.params.e_max = 1e-9;
    const double horizon = 0.5 * t_sup0(sc);
    const auto res = brute_force(sc, EconomicModel{1.0, 1.0, 0.01}, horizon, coarse(3));
    CHECK_THAT(res.gap, WithinAbs(0.0, 1e-9 * std::abs(res.best_value)));
}

TEST_CASE("no feasible candidate") {
    auto sc = fixtures::power(0.5, 1.0);
    sc.params.e_max = 1.0;
    SearchOptions o = coarse(2);
    o.terminal_n_min = true;
    CHECK_THROWS_AS(brute_force(sc, EconomicModel{}, 5.0, o), NoFeasiblePolicy);
}

TEST_CASE("search results do not depend on the thread count") {
    const auto sc = fixtures::fagacees();
    const EconomicModel m{1.0, 1.0, 0.01};
    SearchOptions a = coarse(), b = coarse();
    a.threads = 1;
    b.threads = 4;
    const auto ra = brute_force(sc, m, 30.0, a), rb = brute_force(sc, m, 30.0, b);
    CHECK(ra.best_label == rb.best_label);
    CHECK(ra.best_value == rb.best_value);
    CHECK(ra.feasible == rb.feasible);
}
