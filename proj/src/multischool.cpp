#include "admitlab/multischool.hpp"

#include "admitlab/errors.hpp"
#include "admitlab/estimation.hpp"
#include "admitlab/selection.hpp"
#include "admitlab/statfns.hpp"

#include <cmath>
#include <limits>

namespace admitlab {

const char* to_string(TierLabel t) {
    switch (t) {
    case TierLabel::TopTier: return "TopTier";
    case TierLabel::MidTier: return "MidTier";
    case TierLabel::LowTier: return "LowTier";
    case TierLabel::Unclassified: return "Unclassified";
    }
    return "Unclassified";
}

Policy common_policy(const Market& m) {
    if (m.capacities.empty()) throw ModelError("market needs at least one school");
    if (!m.policies.empty() && m.policies.size() != m.capacities.size())
        throw ModelError("one policy per school is required");
    Policy p = m.policies.empty() ? Policy::full() : m.policies.front();
    for (const auto& q : m.policies)
        if (!(q.features == p.features) || q.aa_target != p.aa_target || q.estimation != p.estimation)
            throw ModelError("closed-form market needs identical school policies");
    if (p.estimation != Estimation::GroupAware || p.aa_target)
        throw ModelError("closed-form market needs group-aware policies without affirmative action");
    return p;
}

namespace {

double applicant_mass_above(const Scenario& s, const FeatureSet& f, double t) {
    return group_mass_above(s, Group::A, f, t) + group_mass_above(s, Group::B, f, t);
}

double applicant_mass(const Scenario& s, const FeatureSet& f) {
    auto [ga, gb] = effective_access(s, f);
    return (1.0 - s.pi) * ga + s.pi * gb;
}

}  // namespace

std::vector<double> equilibrium_cutoffs(const Market& m) {
    const Scenario& s = m.scenario;
    Policy p = common_policy(m);
    const double total = applicant_mass(s, p.features);
    std::vector<double> out;
    double cum = 0.0;
    for (double c : m.capacities) {
        if (!(c > 0.0)) throw ModelError("school capacities must be positive");
        cum += c;
        if (!(cum < total))
            throw ModelError("capacity infeasible: cumulative capacity reaches the applicant mass");
        double target = cum;
        auto f = [&](double t) { return target - applicant_mass_above(s, p.features, t); };
        const double w = 12.0 * s.sigma();
        out.push_back(stat::solve_monotone_root(f, s.prior_mean - w, s.prior_mean + w));
    }
    return out;
}

std::pair<double, double> crossing_points(const Scenario& s, const FeatureSet& f) {
    double va = estimate_law(s, Group::A, f).variance;
    double vb = estimate_law(s, Group::B, f).variance;
    if (nearly_equal(va, vb)) throw ModelError("estimate densities coincide: no crossing points");
    double r = 2.0 * va * vb / (vb - va) * std::log(std::sqrt(vb) / std::sqrt(va));
    double d = std::sqrt(r);
    return {s.prior_mean - d, s.prior_mean + d};
}

std::pair<double, double> tier_cutoffs(const Scenario& s, const FeatureSet& f) {
    auto [q1, q2] = crossing_points(s, f);
    double total = applicant_mass(s, f);
    return {total - applicant_mass_above(s, f, q1), total - applicant_mass_above(s, f, q2)};
}

std::vector<TierLabel> classify_tiers(const Market& m) {
    const Scenario& s = m.scenario;
    Policy p = common_policy(m);
    std::vector<TierLabel> out(m.capacities.size(), TierLabel::Unclassified);
    double va = estimate_law(s, Group::A, p.features).variance;
    double vb = estimate_law(s, Group::B, p.features).variance;
    if (nearly_equal(va, vb)) return out;

    auto [x1, x2] = tier_cutoffs(s, p.features);
    const double total = applicant_mass(s, p.features);
    double d_prev = 0.0;
    for (std::size_t j = 0; j < m.capacities.size(); ++j) {
        double d = d_prev + m.capacities[j];
        // Mass below the school's lower and upper cutoffs.
        double below_hi = total - d_prev, below_lo = total - d;
        if (below_lo > x2) out[j] = TierLabel::TopTier;
        else if (below_hi > x1 && below_hi < x2 && below_lo > x1 && below_lo < x2) out[j] = TierLabel::MidTier;
        else if (below_hi < x1) out[j] = TierLabel::LowTier;
        d_prev = d;
    }
    return out;
}

MarketOutcome solve_market(const Market& m) {
    const Scenario& s = m.scenario;
    Policy p = common_policy(m);
    MarketOutcome out;
    out.cutoffs = equilibrium_cutoffs(m);
    auto tiers = classify_tiers(m);
    try {
        out.crossing = crossing_points(s, p.features);
        out.tier_cutoffs = tier_cutoffs(s, p.features);
    } catch (const ModelError&) {
    }

    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < out.cutoffs.size(); ++j) {
        SchoolOutcome so;
        so.cutoff = out.cutoffs[j];
        so.tier = tiers[j];
        for (Group g : {Group::A, Group::B}) {
            auto law = estimate_law(s, g, p.features);
            double lo = (so.cutoff - law.mean) / law.sd();
            double hi = std::isinf(upper) ? upper : (upper - law.mean) / law.sd();
            double tail_lo = stat::ccdf(lo), tail_hi = std::isinf(hi) ? 0.0 : stat::ccdf(hi);
            double mass = group_mass_above(s, g, p.features, so.cutoff) -
                          (std::isinf(upper) ? 0.0 : group_mass_above(s, g, p.features, upper));
            double dens = stat::pdf(lo) - (std::isinf(hi) ? 0.0 : stat::pdf(hi));
            double merit = law.mean + law.sd() * dens / (tail_lo - tail_hi);
            (g == Group::A ? so.mass_a : so.mass_b) = mass;
            (g == Group::A ? so.merit_a : so.merit_b) = merit;
        }
        so.band_mass = so.mass_a + so.mass_b;
        so.diversity = so.mass_b / so.band_mass;
        out.schools.push_back(so);
        upper = so.cutoff;
    }
    return out;
}

namespace {

struct TwoSchoolTally {
    double sum[2][2] = {{0, 0}, {0, 0}};
    std::uint64_t cnt[2][2] = {{0, 0}, {0, 0}};

    double merit(int j, int g) const { return cnt[j][g] ? sum[j][g] / cnt[j][g] : NAN; }
    double diversity(int j) const {
        auto tot = cnt[j][0] + cnt[j][1];
        return tot ? static_cast<double>(cnt[j][1]) / tot : NAN;
    }
};

}  // namespace

DeviationReport two_school_deviation(const Market& m, const McConfig& cfg) {
    if (m.capacities.size() != 2) throw ModelError("two-school deviation needs exactly two schools");
    const Scenario& s = m.scenario;
    require_valid(s);
    const double c1 = m.capacities[0], c2 = m.capacities[1];
    if (c1 + c2 > 0.5) throw ModelError("two-school deviation needs C_1 + C_2 <= 0.5");

    const unsigned threads = resolve_threads(cfg.threads);
    auto pop = draw_population(s, cfg.seed, cfg.n_students, threads);
    auto est_full = compute_estimates(s, pop, FeatureSet::full(), Estimation::GroupAware, threads);
    auto est_sub = compute_estimates(s, pop, FeatureSet::subset(), Estimation::GroupAware, threads);

    auto run = [&](bool school1_drops, std::size_t b, std::size_t e) {
        TwoSchoolTally t;
        const auto span = static_cast<double>(e - b);
        auto k1 = static_cast<std::size_t>(std::floor(span * c1));
        auto k2 = static_cast<std::size_t>(std::floor(span * c2));
        const auto& est1 = school1_drops ? est_sub : est_full;
        std::vector<std::size_t> pool1;
        for (std::size_t i = b; i < e; ++i)
            if (school1_drops || pop.has_access[i]) pool1.push_back(i);
        auto chosen1 = select_top(est1, pool1, k1);
        std::vector<std::uint8_t> taken(e - b, 0);
        for (std::size_t i : chosen1) taken[i - b] = 1;
        std::vector<std::size_t> pool2;
        for (std::size_t i = b; i < e; ++i)
            if (pop.has_access[i] && !taken[i - b]) pool2.push_back(i);
        auto chosen2 = select_top(est_full, pool2, k2);
        for (int j = 0; j < 2; ++j) {
            for (std::size_t i : (j == 0 ? chosen1 : chosen2)) {
                int g = pop.is_b[i] ? 1 : 0;
                t.sum[j][g] += pop.skill[i];
                ++t.cnt[j][g];
            }
        }
        return t;
    };

    DeviationReport r;
    r.n_students = pop.n;
    r.seats[0] = static_cast<std::uint64_t>(std::floor(static_cast<double>(pop.n) * c1));
    r.seats[1] = static_cast<std::uint64_t>(std::floor(static_cast<double>(pop.n) * c2));
    auto base = run(false, 0, pop.n);
    auto dev = run(true, 0, pop.n);
    for (int j = 0; j < 2; ++j) {
        for (int g = 0; g < 2; ++g) {
            r.merit[j][g].base = base.merit(j, g);
            r.merit[j][g].deviated = dev.merit(j, g);
        }
        r.diversity[j].base = base.diversity(j);
        r.diversity[j].deviated = dev.diversity(j);
    }

    const unsigned B = std::max(2u, cfg.se_blocks);
    std::vector<TwoSchoolTally> bb(B), bd(B);
    parallel_for(B, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            std::size_t b = k * pop.n / B, e = (k + 1) * pop.n / B;
            bb[k] = run(false, b, e);
            bd[k] = run(true, b, e);
        }
    });
    auto se_of = [&](auto delta_fn) {
        std::vector<double> v;
        for (unsigned k = 0; k < B; ++k) {
            double d = delta_fn(k);
            if (std::isfinite(d)) v.push_back(d);
        }
        if (v.size() < 2) return 0.0;
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    };
    for (int j = 0; j < 2; ++j) {
        for (int g = 0; g < 2; ++g)
            r.merit[j][g].delta_se = se_of([&](unsigned k) { return bd[k].merit(j, g) - bb[k].merit(j, g); });
        r.diversity[j].delta_se = se_of([&](unsigned k) { return bd[k].diversity(j) - bb[k].diversity(j); });
    }
    return r;
}

}  // namespace admitlab
