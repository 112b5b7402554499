#include "admitlab/metrics.hpp"

#include "admitlab/estimation.hpp"
#include "admitlab/statfns.hpp"

#include <cmath>

namespace admitlab {

double diversity(const Scenario& s, const Policy& p, const Thresholds& t) {
    return group_mass_above(s, Group::B, p.features, t.for_group(Group::B)) / s.capacity;
}

double merit_group(const Scenario& s, const Policy& p, const Thresholds& t, Group g) {
    auto law = estimate_law(s, g, p.features);
    return stat::truncated_mean_above(law.mean, law.sd(), t.for_group(g));
}

double merit_overall(const Scenario& s, const Policy& p, const Thresholds& t) {
    double tau = diversity(s, p, t);
    return (1.0 - tau) * merit_group(s, p, t, Group::A) + tau * merit_group(s, p, t, Group::B);
}

namespace {

// Admission probability is ccdf of this.
double admission_z(const Scenario& s, const Policy& p, const Thresholds& t, Group g, double q) {
    double P = total_precision(s, g, p.features);
    double d = s.prior_precision() + P;
    return (d / std::sqrt(P)) * (t.for_group(g) - (s.prior_mean * s.prior_precision() + q * P) / d);
}

}  // namespace

double admission_probability(const Scenario& s, const Policy& p, const Thresholds& t, Group g,
                             double q) {
    return stat::ccdf(admission_z(s, p, t, g, q));
}

double individual_fairness_gap(const Scenario& s, const Policy& p, const Thresholds& t, double q) {
    double za = admission_z(s, p, t, Group::A, q), zb = admission_z(s, p, t, Group::B, q);
    // Both probabilities near 1: subtract the rejection probabilities instead.
    if (za < 0.0 && zb < 0.0) return stat::cdf(zb) - stat::cdf(za);
    return stat::ccdf(za) - stat::ccdf(zb);
}

PolicyOutcome evaluate(const Scenario& s, const Policy& p, ThresholdMode mode) {
    PolicyOutcome out;
    out.thresholds = thresholds_for(s, p, mode);
    out.merit_a = merit_group(s, p, out.thresholds, Group::A);
    out.merit_b = merit_group(s, p, out.thresholds, Group::B);
    out.diversity = diversity(s, p, out.thresholds);
    out.merit_overall = (1.0 - out.diversity) * out.merit_a + out.diversity * out.merit_b;
    out.admitted_mass = admitted_mass(s, p.features, out.thresholds);
    return out;
}

}  // namespace admitlab
