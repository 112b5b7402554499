#include "admitlab/selection.hpp"

#include "admitlab/errors.hpp"
#include "admitlab/estimation.hpp"
#include "admitlab/statfns.hpp"

#include <cmath>
#include <string>

namespace admitlab {

double Thresholds::for_group(Group g) const {
    if (per_group) return g == Group::A ? per_group->first : per_group->second;
    if (common) return *common;
    throw ModelError("thresholds not populated");
}

double group_mass_above(const Scenario& s, Group g, const FeatureSet& f, double t) {
    auto [ga, gb] = effective_access(s, f);
    double gamma = g == Group::A ? ga : gb;
    double sd = estimate_law(s, g, f).sd();
    double tail = sd > 0.0 ? stat::ccdf((t - s.prior_mean) / sd) : (s.prior_mean >= t ? 1.0 : 0.0);
    return s.share(g) * gamma * tail;
}

double common_threshold(const Scenario& s, const FeatureSet& f, ThresholdMode mode) {
    if (f.resolve(s.num_features()).empty())
        throw ModelError("threshold undefined for an empty feature set");
    auto [ga, gb] = effective_access(s, f);
    const double wa = (1.0 - s.pi) * ga, wb = s.pi * gb, total = wa + wb;
    if (!(s.capacity < total))
        throw ModelError("over-demand violated: capacity " + std::to_string(s.capacity) +
                         " >= applicant mass " + std::to_string(total));

    if (mode == ThresholdMode::ClosedForm) {
        double va = shrinkage(s, Group::A, f), vb = shrinkage(s, Group::B, f);
        return s.prior_mean + stat::quantile(1.0 - s.capacity / total) * s.sigma() *
                                  std::sqrt((wa * va + wb * vb) / total);
    }
    auto excess = [&](double t) {
        return s.capacity - group_mass_above(s, Group::A, f, t) - group_mass_above(s, Group::B, f, t);
    };
    const double w = 12.0 * s.sigma();
    return stat::solve_monotone_root(excess, s.prior_mean - w, s.prior_mean + w);
}

Thresholds threshold_no_barriers(const Scenario& s, const FeatureSet& f, ThresholdMode mode) {
    Scenario open = s;
    open.a.access = 1.0;
    open.b.access = 1.0;
    return {common_threshold(open, f, mode), std::nullopt};
}

Thresholds threshold_with_barriers(const Scenario& s, ThresholdMode mode) {
    return {common_threshold(s, FeatureSet::full(), mode), std::nullopt};
}

Thresholds thresholds_affirmative_action(const Scenario& s, const FeatureSet& f, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ModelError("aa target must lie in (0,1)");
    if (f.resolve(s.num_features()).empty())
        throw ModelError("threshold undefined for an empty feature set");
    auto [ga, gb] = effective_access(s, f);
    auto one = [&](Group g, double gamma, double share_of_seats) {
        double pool = s.share(g) * gamma;
        double p = 1.0 - share_of_seats * s.capacity / (pool > 0.0 ? pool : 0.0);
        if (!(pool > 0.0) || !(p > 0.0 && p < 1.0))
            throw ModelError(std::string("aa target infeasible for group ") + to_string(g));
        return s.prior_mean + estimate_law(s, g, f).sd() * stat::quantile(p);
    };
    double ta = one(Group::A, ga, 1.0 - tau);
    double tb = one(Group::B, gb, tau);
    return {std::nullopt, std::make_pair(ta, tb)};
}

Thresholds thresholds_for(const Scenario& s, const Policy& p, ThresholdMode mode) {
    if (p.estimation != Estimation::GroupAware)
        throw ModelError("closed-form thresholds need group-aware estimation");
    if (p.aa_target) return thresholds_affirmative_action(s, p.features, *p.aa_target);
    return {common_threshold(s, p.features, mode), std::nullopt};
}

double admitted_mass(const Scenario& s, const FeatureSet& f, const Thresholds& t) {
    return group_mass_above(s, Group::A, f, t.for_group(Group::A)) +
           group_mass_above(s, Group::B, f, t.for_group(Group::B));
}

bool admit(double q_tilde, Group g, const Thresholds& t) { return q_tilde >= t.for_group(g); }

}  // namespace admitlab
