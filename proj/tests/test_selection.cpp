#include "admitlab/errors.hpp"
#include "admitlab/estimation.hpp"
#include "admitlab/rng.hpp"
#include "admitlab/scenario_gen.hpp"
#include "admitlab/selection.hpp"

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace admitlab;
using Catch::Matchers::WithinAbs;

namespace {

const double kExact = 1e-10;

// Oracle quantile of the standard normal.
double z(double p) {
    return oracle::bisect([p](double x) { return oracle::Phi(x) - p; }, -40, 40);
}

// Applicant mass above t with the oracle CDF.
double mass_above(const Scenario& s, const FeatureSet& f, double t, bool with_access) {
    double m = 0.0;
    for (Group g : {Group::A, Group::B}) {
        auto law = estimate_law(s, g, f);
        double share = g == Group::A ? 1.0 - s.pi : s.pi;
        double gamma = with_access ? s.params(g).access : 1.0;
        m += share * gamma * oracle::Phi(-(t - law.mean) / law.sd());
    }
    return m;
}

}  // namespace

TEST_CASE("threshold_no_barriers") {
    SECTION("equal shrinkage") {
        auto s = fixture::with_shrinkage(0.5, 0.5);
        double ref = z(0.8) * std::sqrt(0.5);
        for (auto mode : {ThresholdMode::ExactMixture, ThresholdMode::ClosedForm}) {
            CHECK_THAT(*threshold_no_barriers(s, FeatureSet::full(), mode).common, WithinAbs(ref, 1e-12));
        }
        // Quoted as 0.595135; the oracle gives 0.5951161.
        CHECK_THAT(ref, WithinAbs(0.595135, 1e-4));
    }
    SECTION("median") {
        auto s = fixture::symmetric(1.0, 1.0, 0.5);
        for (auto mode : {ThresholdMode::ExactMixture, ThresholdMode::ClosedForm})
            CHECK_THAT(*threshold_no_barriers(s, FeatureSet::full(), mode).common, WithinAbs(s.prior_mean, 1e-12));
    }
    SECTION("unequal shrinkage: modes differ, exact root satisfies the mixture equation") {
        auto s = fixture::with_shrinkage(2.0 / 3.0, 0.5);
        double exact = *threshold_no_barriers(s, FeatureSet::full()).common;
        double closed = *threshold_no_barriers(s, FeatureSet::full(), ThresholdMode::ClosedForm).common;
        CHECK(std::abs(exact - closed) > 1e-6);
        CHECK_THAT(1.0 - mass_above(s, FeatureSet::full(), exact, false), WithinAbs(0.8, kExact));
        double pooled = std::sqrt(0.5 * 2.0 / 3.0 + 0.5 * 0.5);
        CHECK_THAT(closed, WithinAbs(z(0.8) * pooled, 1e-12));
    }
    SECTION("access ignored") {
        auto s = fixture::two_feature(0.3);
        auto open = s;
        open.b.access = 1.0;
        CHECK(*threshold_no_barriers(s, FeatureSet::full()).common == *threshold_no_barriers(open, FeatureSet::full()).common);
    }
    SECTION("empty feature set rejected") {
        CHECK_THROWS_AS(threshold_no_barriers(fixture::two_feature(), FeatureSet::empty()), ModelError);
    }
}

TEST_CASE("threshold_with_barriers") {
    SECTION("no barriers reduces to the open threshold") {
        auto s = fixture::two_feature(1.0);
        for (auto mode : {ThresholdMode::ExactMixture, ThresholdMode::ClosedForm})
            CHECK_THAT(*threshold_with_barriers(s, mode).common,
                       WithinAbs(*threshold_no_barriers(s, FeatureSet::full(), mode).common, 1e-12));
    }
    SECTION("closed form with equal shrinkage") {
        auto s = fixture::with_shrinkage(0.5, 0.5);
        s.b.access = 2.0 / 3.0;
        double ref = z(1.0 - 0.2 / (0.5 + 0.5 * 2.0 / 3.0)) * std::sqrt(0.5);
        CHECK_THAT(*threshold_with_barriers(s, ThresholdMode::ClosedForm).common, WithinAbs(ref, 1e-12));
        CHECK_THAT(ref, WithinAbs(0.49943, 1e-5));
        CHECK_THAT(*threshold_with_barriers(s).common, WithinAbs(ref, 1e-12));
    }
    SECTION("vanishing group-B access approaches the group-A-only quantile") {
        // Fewer applicants fill the same capacity, so the threshold falls toward the limit.
        auto s = fixture::with_shrinkage(0.6, 0.4);
        double a_only = z(1.0 - s.capacity / (1.0 - s.pi)) * std::sqrt(0.6);
        double prev = INFINITY;
        for (double gb : {1.0, 0.5, 0.2, 0.1, 0.01, 1e-4, 1e-7}) {
            s.b.access = gb;
            double t = *threshold_with_barriers(s).common;
            CHECK(t < prev);
            CHECK(t > a_only);
            prev = t;
        }
        CHECK_THAT(prev, WithinAbs(a_only, 1e-5));
    }
    SECTION("over-demand") {
        auto s = fixture::two_feature();
        s.a.access = s.b.access = 0.1;
        CHECK_THROWS_AS(threshold_with_barriers(s), ModelError);
    }
}

TEST_CASE("thresholds_affirmative_action") {
    SECTION("tau = pi with symmetric groups") {
        auto s = fixture::symmetric();
        auto t = thresholds_affirmative_action(s, FeatureSet::full(), s.pi);
        double open = *threshold_no_barriers(s, FeatureSet::full()).common;
        CHECK_THAT(t.per_group->first, WithinAbs(open, 1e-12));
        CHECK_THAT(t.per_group->second, WithinAbs(open, 1e-12));
        CHECK_FALSE(t.common);
    }
    SECTION("group-B quantile") {
        auto s = fixture::with_shrinkage(2.0 / 3.0, 0.5);
        auto t = thresholds_affirmative_action(s, FeatureSet::full(), 0.5);
        CHECK_THAT(t.per_group->second, WithinAbs(z(0.8) * std::sqrt(0.5), 1e-12));
        CHECK_THAT(t.per_group->first, WithinAbs(z(0.8) * std::sqrt(2.0 / 3.0), 1e-12));
    }
    SECTION("infeasible targets") {
        auto s = fixture::two_feature(0.3);  // group B can fill at most 75% of the seats
        CHECK_THROWS_AS(thresholds_affirmative_action(s, FeatureSet::full(), 0.9), ModelError);
        CHECK_THROWS_AS(thresholds_affirmative_action(s, FeatureSet::full(), 0.0), ModelError);
        CHECK_THROWS_AS(thresholds_affirmative_action(s, FeatureSet::full(), 1.0), ModelError);
    }
    SECTION("each group admits its quota") {
        auto s = fixture::two_feature();
        auto t = thresholds_affirmative_action(s, FeatureSet::full(), 0.4);
        CHECK_THAT(group_mass_above(s, Group::B, FeatureSet::full(), t.per_group->second), WithinAbs(0.4 * 0.2, 1e-12));
        CHECK_THAT(group_mass_above(s, Group::A, FeatureSet::full(), t.per_group->first), WithinAbs(0.6 * 0.2, 1e-12));
    }
}

TEST_CASE("admit") {
    Thresholds c;
    c.common = 0.3;
    CHECK(admit(0.3, Group::A, c));
    CHECK_FALSE(admit(std::nextafter(0.3, 0.0), Group::B, c));
    Thresholds pg;
    pg.per_group = std::make_pair(1.0, 0.5);
    CHECK(admit(0.7, Group::B, pg));
    CHECK_FALSE(admit(0.7, Group::A, pg));
    CHECK_THROWS_AS(admit(0.0, Group::A, Thresholds{}), ModelError);
}

TEST_CASE("threshold properties on random scenarios") {
    CounterRng rng(21);
    ScenarioFamily fam;
    fam.barriers = true;
    for (int c = 0; c < 200; ++c) {
        auto s = random_scenario(rng, fam);
        // Mass conservation with and without barriers.
        double tb = *threshold_with_barriers(s).common;
        CHECK_THAT(mass_above(s, FeatureSet::full(), tb, true), WithinAbs(s.capacity, kExact));
        for (auto f : {FeatureSet::full(), FeatureSet::subset()}) {
            double t = *threshold_no_barriers(s, f).common;
            CHECK_THAT(mass_above(s, f, t, false), WithinAbs(s.capacity, kExact));
            CHECK(t >= s.prior_mean);
        }
        // Dropping the test lowers the threshold in both modes.
        for (auto mode : {ThresholdMode::ExactMixture, ThresholdMode::ClosedForm}) {
            CHECK(*threshold_no_barriers(s, FeatureSet::subset(), mode).common <
                  *threshold_no_barriers(s, FeatureSet::full(), mode).common);
        }
        // AA ordering once tau exceeds the unconstrained diversity.
        auto ps = s;
        ps.b.access = std::min(s.b.access, s.a.access);
        double t = *threshold_with_barriers(ps).common;
        double div = group_mass_above(ps, Group::B, FeatureSet::full(), t) / ps.capacity;
        double cap_b = ps.pi * ps.b.access / ps.capacity;
        double cap_a = 1.0 - (1.0 - ps.pi) * ps.a.access / ps.capacity;
        double tau = div + 0.5 * (std::min(cap_b, 1.0) - div);
        if (tau > div + 1e-6 && tau > cap_a && tau < cap_b) {
            auto aa = thresholds_affirmative_action(ps, FeatureSet::full(), tau);
            CHECK(aa.per_group->second < t);
            CHECK(t < aa.per_group->first);
        }
    }
}

TEST_CASE("modes agree exactly when shrinkage is equal") {
    for (double v : {0.2, 0.5, 0.9}) {
        auto s = fixture::with_shrinkage(v, v, 0.15, 0.3);
        s.b.access = 0.7;
        CHECK_THAT(*threshold_with_barriers(s).common,
                   WithinAbs(*threshold_with_barriers(s, ThresholdMode::ClosedForm).common, 1e-12));
    }
}
