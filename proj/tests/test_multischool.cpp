#include "admitlab/errors.hpp"
#include "admitlab/estimation.hpp"
#include "admitlab/metrics.hpp"
#include "admitlab/multischool.hpp"

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace admitlab;
using Catch::Matchers::WithinAbs;

namespace {

Market ten_school(double access_b = 1.0) {
    Market m;
    m.scenario = fixture::two_feature(access_b);
    m.capacities.assign(10, 0.05);
    m.scenario.capacity = 0.5;
    return m;
}

double law_density(const Scenario& s, Group g, double x) {
    auto law = estimate_law(s, g, FeatureSet::full());
    return oracle::phi((x - law.mean) / law.sd()) / law.sd();
}

// Mass of group g in (lo, hi] by quadrature on the estimate density.
double band_integral(const Scenario& s, Group g, double lo, double hi) {
    double share = g == Group::A ? 1.0 - s.pi : s.pi;
    double gamma = s.params(g).access;
    double top = std::isinf(hi) ? s.prior_mean + 12.0 * std::sqrt(s.prior_variance) : hi;
    return share * gamma * oracle::simpson([&](double x) { return law_density(s, g, x); }, lo, top);
}

}  // namespace

TEST_CASE("single school reproduces the single-school solver") {
    Market m;
    m.scenario = fixture::two_feature();
    m.capacities = {0.2};
    auto c = equilibrium_cutoffs(m);
    REQUIRE(c.size() == 1);
    CHECK_THAT(c[0], WithinAbs(*threshold_with_barriers(m.scenario).common, 1e-12));

    auto out = solve_market(m);
    auto ref = evaluate(m.scenario, Policy::full());
    CHECK_THAT(out.schools[0].diversity, WithinAbs(ref.diversity, 1e-12));
    CHECK_THAT(out.schools[0].merit_a, WithinAbs(ref.merit_a, 1e-12));
    CHECK_THAT(out.schools[0].merit_b, WithinAbs(ref.merit_b, 1e-12));

    m.scenario = fixture::two_feature(1.0);
    CHECK_THAT(equilibrium_cutoffs(m)[0], WithinAbs(*threshold_no_barriers(m.scenario, FeatureSet::full()).common, 1e-12));
}

TEST_CASE("ten-school market") {
    auto m = ten_school();
    auto out = solve_market(m);
    REQUIRE(out.cutoffs.size() == 10);
    double prev = INFINITY, total = 0.0;
    for (std::size_t j = 0; j < 10; ++j) {
        CHECK(out.cutoffs[j] < prev);
        CHECK_THAT(out.schools[j].band_mass, WithinAbs(0.05, 1e-10));
        // Band masses by independent quadrature.
        double qa = band_integral(m.scenario, Group::A, out.cutoffs[j], prev);
        double qb = band_integral(m.scenario, Group::B, out.cutoffs[j], prev);
        CHECK_THAT(out.schools[j].mass_a, WithinAbs(qa, 1e-9));
        CHECK_THAT(out.schools[j].mass_b, WithinAbs(qb, 1e-9));
        total += out.schools[j].band_mass;
        prev = out.cutoffs[j];
    }
    CHECK_THAT(total, WithinAbs(0.5, 1e-10));

    // Elite schools under-represent group B; the middle band does not.
    CHECK(out.schools[0].tier == TierLabel::TopTier);
    CHECK(out.schools[0].diversity < m.scenario.pi);
    for (std::size_t j = 0; j < 10; ++j) {
        if (out.schools[j].tier == TierLabel::TopTier) CHECK(out.schools[j].diversity < m.scenario.pi);
        if (out.schools[j].tier == TierLabel::MidTier) CHECK(out.schools[j].diversity >= m.scenario.pi);
    }
    CHECK(out.schools[9].tier == TierLabel::MidTier);
}

TEST_CASE("equal precisions: no tiers") {
    Market m;
    m.scenario = fixture::symmetric(1.0, 0.5, 0.3);
    m.scenario.pi = 0.35;
    m.capacities = {0.1, 0.1, 0.1};
    auto out = solve_market(m);
    for (const auto& sch : out.schools) {
        CHECK(sch.tier == TierLabel::Unclassified);
        CHECK_THAT(sch.diversity, WithinAbs(0.35, 1e-12));
    }
    CHECK_FALSE(out.crossing);
    CHECK_THROWS_AS(crossing_points(m.scenario, FeatureSet::full()), ModelError);
}

TEST_CASE("crossing points") {
    // Estimate variances 2/3 and 1/2.
    Scenario s;
    s.a.features = {{0.0, 1.0}, {0.0, 1.0}};
    s.b.features = {{0.0, 2.0}, {0.0, 2.0}};
    auto [q1, q2] = crossing_points(s, FeatureSet::full());
    double ref = std::sqrt(2.0 * (2.0 / 3.0) * 0.5 / (0.5 - 2.0 / 3.0) * std::log(std::sqrt(0.5) / std::sqrt(2.0 / 3.0)));
    CHECK_THAT(q2, WithinAbs(ref, 1e-14));
    CHECK_THAT(q2, WithinAbs(0.75852, 1e-5));
    CHECK_THAT(q1, WithinAbs(-q2, 1e-15));
    for (double q : {q1, q2}) CHECK_THAT(law_density(s, Group::A, q), WithinAbs(law_density(s, Group::B, q), 1e-10));

    auto base = fixture::two_feature(1.0);
    auto [r1, r2] = crossing_points(base, FeatureSet::full());
    for (double q : {r1, r2}) CHECK_THAT(law_density(base, Group::A, q), WithinAbs(law_density(base, Group::B, q), 1e-10));
    auto [x1, x2] = tier_cutoffs(base, FeatureSet::full());
    CHECK(0.0 < x1);
    CHECK(x1 < x2);
    CHECK(x2 < 1.0);
    // Mass below the crossings by quadrature.
    CHECK_THAT(x1, WithinAbs(1.0 - band_integral(base, Group::A, r1, INFINITY) - band_integral(base, Group::B, r1, INFINITY), 1e-9));
}

TEST_CASE("market validation") {
    Market m = ten_school();
    m.capacities.push_back(0.6);
    CHECK_THROWS_AS(equilibrium_cutoffs(m), ModelError);
    Market mixed = ten_school();
    mixed.policies.assign(10, Policy::full());
    mixed.policies[3] = Policy::subset();
    CHECK_THROWS_AS(common_policy(mixed), ModelError);
}

TEST_CASE("two-school deviation") {
    Market m;
    m.scenario = fixture::two_feature(1.0);
    m.capacities = {0.1, 0.1};
    McConfig cfg;
    cfg.n_students = 300000;
    cfg.seed = 4;
    auto r = two_school_deviation(m, cfg);
    CHECK(r.seats[0] == 30000);
    CHECK(r.seats[1] == 30000);
    for (int g = 0; g < 2; ++g) {
        CHECK(r.merit[0][g].delta() <= 3.0 * r.merit[0][g].delta_se);
        CHECK(r.merit[0][g].delta() < 0.0);
        CHECK(r.merit[1][g].delta() >= -3.0 * r.merit[1][g].delta_se);
        CHECK(r.merit[1][g].delta() > 0.0);
    }

    SECTION("uninformative test: no effect") {
        Market u = m;
        u.scenario.a.features[1].variance = 1e12;
        u.scenario.b.features[1].variance = 1e12;
        auto d = two_school_deviation(u, cfg);
        for (int j = 0; j < 2; ++j) {
            for (int g = 0; g < 2; ++g) CHECK(std::abs(d.merit[j][g].delta()) <= 3.0 * std::max(d.merit[j][g].delta_se, 1e-12));
        }
    }
}
