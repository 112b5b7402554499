#pragma once

#include "admitlab/model.hpp"
#include "admitlab/montecarlo.hpp"

#include <string>
#include <utility>
#include <vector>

namespace admitlab {

// Schools ranked by index (school 0 is the most preferred).
struct Market {
    Scenario scenario;
    std::vector<double> capacities;
    std::vector<Policy> policies;  // one per school; empty means every school uses Full
};

enum class TierLabel { TopTier, MidTier, LowTier, Unclassified };
const char* to_string(TierLabel t);

struct SchoolOutcome {
    double cutoff = 0.0;
    double band_mass = 0.0;
    double mass_a = 0.0;
    double mass_b = 0.0;
    double diversity = 0.0;
    double merit_a = 0.0;
    double merit_b = 0.0;
    TierLabel tier = TierLabel::Unclassified;
};

struct MarketOutcome {
    std::vector<double> cutoffs;
    std::vector<SchoolOutcome> schools;
    std::optional<std::pair<double, double>> crossing;  // q_1 < q_2
    std::optional<std::pair<double, double>> tier_cutoffs;  // X_1 < X_2
};

// Policy shared by every school; throws ModelError for heterogeneous or non-analytic policies.
Policy common_policy(const Market& m);

// Cutoffs with applicant mass D_j above cutoff j, D_j the cumulative capacity.
std::vector<double> equilibrium_cutoffs(const Market& m);

// Points where the two estimate densities are equal.
std::pair<double, double> crossing_points(const Scenario& s, const FeatureSet& f);

// Tier cutoffs X_k = mixture mass below q_k, weights (1-pi) on A and pi on B.
std::pair<double, double> tier_cutoffs(const Scenario& s, const FeatureSet& f);

std::vector<TierLabel> classify_tiers(const Market& m);

// Cutoffs, band masses, per-school diversity and merit, tiers.
MarketOutcome solve_market(const Market& m);

struct DeviationCell {
    double base = 0.0;      // both schools keep the test
    double deviated = 0.0;  // school 1 drops the test
    double delta_se = 0.0;  // batch standard error of deviated - base
    double delta() const { return deviated - base; }
};

struct DeviationReport {
    // [school][group]
    DeviationCell merit[2][2];
    DeviationCell diversity[2];
    std::uint64_t n_students = 0;
    std::uint64_t seats[2] = {0, 0};
};

// Two schools: school 1 admits its top seats by its own estimates, school 2 fills from the rest
// with Full estimates. Compared under (Full, Full) and (Subset, Full) on common random numbers.
DeviationReport two_school_deviation(const Market& m, const McConfig& cfg);

}  // namespace admitlab
