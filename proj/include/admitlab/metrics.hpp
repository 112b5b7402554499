#pragma once

#include "admitlab/model.hpp"
#include "admitlab/selection.hpp"

namespace admitlab {

struct PolicyOutcome {
    Thresholds thresholds;
    double merit_overall = 0.0;
    double merit_a = 0.0;
    double merit_b = 0.0;
    double diversity = 0.0;
    double admitted_mass = 0.0;

    double merit(Group g) const { return g == Group::A ? merit_a : merit_b; }
};

// Share of admitted students from group B: pi gamma_B (1 - F_B(t_B)) / C.
double diversity(const Scenario& s, const Policy& p, const Thresholds& t);
// Mean skill of admitted students of group g (equals the truncated mean of their estimates).
double merit_group(const Scenario& s, const Policy& p, const Thresholds& t, Group g);
double merit_overall(const Scenario& s, const Policy& p, const Thresholds& t);
double admission_probability(const Scenario& s, const Policy& p, const Thresholds& t, Group g,
                             double q);
// P(admit | q, A) - P(admit | q, B).
double individual_fairness_gap(const Scenario& s, const Policy& p, const Thresholds& t, double q);

PolicyOutcome evaluate(const Scenario& s, const Policy& p,
                       ThresholdMode mode = ThresholdMode::ExactMixture);

}  // namespace admitlab
