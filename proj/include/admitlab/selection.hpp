#pragma once

#include "admitlab/model.hpp"

#include <optional>
#include <utility>

namespace admitlab {

struct Thresholds {
    std::optional<double> common;
    std::optional<std::pair<double, double>> per_group;  // (A, B)

    double for_group(Group g) const;
};

// Mass of group g (population share times effective access) whose estimate is at least t.
double group_mass_above(const Scenario& s, Group g, const FeatureSet& f, double t);

// Common threshold for a group-aware policy without AA; access follows effective_access.
double common_threshold(const Scenario& s, const FeatureSet& f,
                        ThresholdMode mode = ThresholdMode::ExactMixture);

// Access treated as 1 for both groups.
Thresholds threshold_no_barriers(const Scenario& s, const FeatureSet& f,
                                 ThresholdMode mode = ThresholdMode::ExactMixture);
// Full features, access rates from the scenario.
Thresholds threshold_with_barriers(const Scenario& s,
                                   ThresholdMode mode = ThresholdMode::ExactMixture);
// Per-group thresholds admitting (1-tau) C of group A and tau C of group B.
Thresholds thresholds_affirmative_action(const Scenario& s, const FeatureSet& f, double tau);

// Dispatch on the policy (group-aware only; unaware thresholds are empirical).
Thresholds thresholds_for(const Scenario& s, const Policy& p,
                          ThresholdMode mode = ThresholdMode::ExactMixture);

double admitted_mass(const Scenario& s, const FeatureSet& f, const Thresholds& t);

// Ties are admitted.
bool admit(double q_tilde, Group g, const Thresholds& t);

}  // namespace admitlab
