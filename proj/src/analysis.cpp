#include "admitlab/analysis.hpp"

#include "admitlab/errors.hpp"
#include "admitlab/estimation.hpp"
#include "admitlab/montecarlo.hpp"
#include "admitlab/selection.hpp"
#include "admitlab/statfns.hpp"

#include <algorithm>
#include <cmath>

namespace admitlab {

namespace {

Scenario without_barriers(Scenario s) {
    s.a.access = 1.0;
    s.b.access = 1.0;
    return s;
}

Scenario with_access(Scenario s, Group g, double gamma) {
    s.params(g).access = gamma;
    return s;
}

void require_two_features(const Scenario& s) {
    if (s.num_features() < 2)
        throw ModelError("dropping the test needs at least two features");
}

void require_unequal(double pa, double pb) {
    if (nearly_equal(pa, pb)) throw ModelError("operation requires unequal precisions");
}

}  // namespace

InfoConstants info_constants(const Scenario& s) {
    require_two_features(s);
    InfoConstants c;
    c.v_a_full = shrinkage(s, Group::A, FeatureSet::full());
    c.v_b_full = shrinkage(s, Group::B, FeatureSet::full());
    c.v_a_sub = shrinkage(s, Group::A, FeatureSet::subset());
    c.v_b_sub = shrinkage(s, Group::B, FeatureSet::subset());
    c.rho_a_full = c.v_b_full / c.v_a_full;
    c.rho_b_full = c.v_a_full / c.v_b_full;
    c.rho_a_sub = c.v_b_sub / c.v_a_sub;
    c.rho_b_sub = c.v_a_sub / c.v_b_sub;
    c.xi_a = c.v_a_sub / c.v_a_full;
    c.xi_b = c.v_b_sub / c.v_b_full;
    return c;
}

double beta(const Scenario& s, Group g, double gamma_a, double gamma_b, double rho_g) {
    double gg = g == Group::A ? gamma_a : gamma_b;
    double go = g == Group::A ? gamma_b : gamma_a;
    double own = s.share(g) * gg, oth = s.share(other(g)) * go;
    double total = own + oth;
    // sqrt((r rho + 1)/(1 + r)) with r = oth/own, written to survive own -> 0.
    return stat::quantile(1.0 - s.capacity / total) * std::sqrt((own + oth * rho_g) / total);
}

double beta(const Scenario& s, Group g) {
    auto c = info_constants(s);
    return beta(s, g, s.a.access, s.b.access, c.rho_full(g));
}

double delta_formula(double scale, double capacity, double share_g, double share_other,
                     double rho) {
    double t = stat::quantile(1.0 - capacity) * std::sqrt(share_g + share_other * rho);
    return stat::hazard_inv(scale * stat::hazard(t));
}

double delta(const Scenario& s, Group g) {
    auto c = info_constants(s);
    return delta_formula(std::sqrt(c.xi(g)), s.capacity, s.share(g), s.share(other(g)),
                         c.rho_sub(g));
}

double merit_full_closed(const Scenario& s, Group g) {
    Policy p = Policy::full();
    auto t = thresholds_for(s, p, ThresholdMode::ClosedForm);
    return merit_group(s, p, t, g);
}

double merit_subset_closed(const Scenario& s, Group g) {
    Policy p = Policy::subset();
    auto t = thresholds_for(s, p, ThresholdMode::ClosedForm);
    return merit_group(s, p, t, g);
}

bool merit_improves_on_drop(const Scenario& s, Group g) { return beta(s, g) <= delta(s, g); }

std::optional<double> gamma_bar_bar(const Scenario& s, Group g) {
    const double sub = merit_subset_closed(s, g);
    // Increasing in gamma_g: full-test merit rises as the pool of group g grows.
    auto f = [&](double gamma) { return merit_full_closed(with_access(s, g, gamma), g) - sub; };
    double floor_gamma = (s.capacity - s.share(other(g)) * s.access(other(g))) / s.share(g);
    double lo = std::max(floor_gamma, 0.0) + 1e-9;
    double hi = 1.0;
    if (lo >= hi) return std::nullopt;
    double flo = f(lo), fhi = f(hi);
    if (!(flo <= 0.0 && fhi >= 0.0)) return std::nullopt;
    return stat::solve_monotone_root(f, lo, hi, 1e-14);
}

double eta(const Scenario& s, double gamma_a, double gamma_b, double rho_b, EtaPrefactor pref) {
    double wa = (1.0 - s.pi) * gamma_a, wb = s.pi * gamma_b, total = wa + wb;
    double pre = (pref == EtaPrefactor::Definitional ? s.pi : 1.0 - s.pi) * gamma_b / s.capacity;
    double z = stat::quantile(1.0 - s.capacity / total) * std::sqrt((wa * rho_b + wb) / total);
    return pre * stat::ccdf(z);
}

bool diversity_improves_on_drop_barriers(const Scenario& s, EtaPrefactor pref) {
    auto c = info_constants(s);
    return eta(s, 1.0, 1.0, c.rho_b_sub, pref) > eta(s, s.a.access, s.b.access, c.rho_b_full, pref);
}

bool diversity_condition_no_barriers(const Scenario& s) {
    require_two_features(s);
    const double sp = s.prior_precision();
    double pas = total_precision(s, Group::A, FeatureSet::subset());
    double pbs = total_precision(s, Group::B, FeatureSet::subset());
    double paf = total_precision(s, Group::A, FeatureSet::full());
    double pbf = total_precision(s, Group::B, FeatureSet::full());
    const std::size_t K = s.num_features();
    double pak = 1.0 / s.a.features[K - 1].variance;
    double pbk = 1.0 / s.b.features[K - 1].variance;
    return (pas * (sp + paf)) / (pbs * (sp + pbf)) < pak / pbk;
}

bool diversity_condition_shrinkage(const Scenario& s) {
    auto c = info_constants(s);
    return c.v_a_sub / c.v_b_sub < c.v_a_full / c.v_b_full;
}

double gamma_hat(const Scenario& s, Group g, double tau, GammaHatForm form) {
    auto c = info_constants(s);
    double v_full = g == Group::A ? c.v_a_full : c.v_b_full;
    double v_sub = g == Group::A ? c.v_a_sub : c.v_b_sub;
    double tau_g = g == Group::A ? 1.0 - tau : tau;
    double seats = tau_g * s.capacity;
    double t_sub = stat::quantile(1.0 - seats / s.share(g));
    double x = stat::hazard_inv(std::sqrt(v_sub / v_full) * stat::hazard(t_sub));
    double denom = stat::ccdf(x);
    if (form == GammaHatForm::Derived) denom *= s.share(g);
    return seats / denom;
}

double aa_merit(const Scenario& s, Group g, const FeatureSet& f, double tau, double gamma_g) {
    double gamma = f.contains_test(s.num_features()) ? gamma_g : 1.0;
    double tau_g = g == Group::A ? 1.0 - tau : tau;
    double p = 1.0 - tau_g * s.capacity / (s.share(g) * gamma);
    if (!(p > 0.0 && p < 1.0)) throw ModelError("aa target infeasible for this access rate");
    auto law = estimate_law(s, g, f);
    double t = law.mean + law.sd() * stat::quantile(p);
    return stat::truncated_mean_above(law.mean, law.sd(), t);
}

double q_e(const Scenario& s, const FeatureSet& f, double threshold) {
    double pa = total_precision(s, Group::A, f), pb = total_precision(s, Group::B, f);
    require_unequal(pa, pb);
    double sp = s.prior_precision();
    double d = s.prior_mean - threshold;
    return threshold + std::sqrt(sp * sp * d * d / (pa * pb) +
                                 (std::log(pa) - std::log(pb)) / (pa - pb));
}

double if_crossing_aa(const Scenario& s, const FeatureSet& f, double t_a, double t_b) {
    double pa = total_precision(s, Group::A, f), pb = total_precision(s, Group::B, f);
    require_unequal(pa, pb);
    double sp = s.prior_precision();
    double ra = std::sqrt(pa), rb = std::sqrt(pb);
    double ca = (sp + pa) / ra, cb = (sp + pb) / rb;
    return (ca * t_a - cb * t_b) / (ra - rb) + s.prior_mean * sp / (ra * rb);
}

double if_crossing_no_aa(const Scenario& s, const FeatureSet& f, double threshold) {
    double pa = total_precision(s, Group::A, f), pb = total_precision(s, Group::B, f);
    require_unequal(pa, pb);
    return threshold -
           s.prior_precision() * (threshold - s.prior_mean) / (std::sqrt(pa) * std::sqrt(pb));
}

double drop_crossing_q(const Scenario& s, Group g) {
    require_two_features(s);
    auto c = info_constants(s);
    const double sp = s.prior_precision();
    double pf = total_precision(s, g, FeatureSet::full());
    double ps = total_precision(s, g, FeatureSet::subset());
    double den = std::sqrt(pf) - std::sqrt(ps);
    if (!(std::abs(den) > 0.0)) throw ModelError("drop crossing undefined: equal precisions");
    double vf = g == Group::A ? c.v_a_full : c.v_b_full;
    double vs = g == Group::A ? c.v_a_sub : c.v_b_sub;
    double pool_f = (1.0 - s.pi) * c.v_a_full + s.pi * c.v_b_full;
    double pool_s = (1.0 - s.pi) * c.v_a_sub + s.pi * c.v_b_sub;
    double term = std::sqrt(sp + pf) * std::sqrt(pool_f / vf) - std::sqrt(sp + ps) * std::sqrt(pool_s / vs);
    return s.prior_mean + s.sigma() * stat::quantile(1.0 - s.capacity) * term / den;
}

std::optional<double> q_hat(const Scenario& s) {
    Scenario open = without_barriers(s);
    Policy pf = Policy::full(), ps = Policy::subset();
    auto tf = thresholds_for(open, pf, ThresholdMode::ClosedForm);
    auto ts = thresholds_for(open, ps, ThresholdMode::ClosedForm);
    auto diff = [&](double q) {
        return individual_fairness_gap(open, pf, tf, q) - individual_fairness_gap(open, ps, ts, q);
    };
    const double lo = s.prior_mean - 10.0 * s.sigma(), hi = s.prior_mean + 10.0 * s.sigma();
    const int n = 4000;
    std::optional<double> best;
    double prev_q = lo, prev = diff(lo);
    for (int i = 1; i <= n; ++i) {
        double q = lo + (hi - lo) * i / n;
        double cur = diff(q);
        if ((prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0)) {
            double sign = cur > 0.0 ? 1.0 : -1.0;
            best = stat::solve_monotone_root([&](double x) { return sign * diff(x); }, prev_q, q);
        }
        prev_q = q;
        prev = cur;
    }
    return best;
}

namespace {

std::string diversity_word(double before, double after) {
    if (after > before) return "improves";
    if (after < before) return "worsens";
    return "unchanged";
}

std::string merit_words(bool a_up, bool b_up) {
    if (!a_up && !b_up) return "worsens for both groups";
    if (a_up && b_up) return "improves for both groups";
    return a_up ? "improves for group A, worsens for group B"
                : "worsens for group A, improves for group B";
}

bool within(double emp, double se, double exact, double slack = 0.0) {
    return std::abs(emp - exact) <= 4.0 * se + slack;
}

}  // namespace

TheoremReport compare_policies(const Scenario& s, std::optional<double> tau,
                               std::optional<McBudget> mc) {
    require_two_features(s);
    TheoremReport r;
    r.barriers = s.a.access < 1.0 || s.b.access < 1.0;
    r.aa_target = tau;
    r.constants = info_constants(s);

    Policy pf = Policy::full(), ps = Policy::subset();
    pf.aa_target = tau;
    ps.aa_target = tau;
    require_valid(s, pf);
    require_valid(s, ps);

    r.exact = {evaluate(s, pf, ThresholdMode::ExactMixture), evaluate(s, ps, ThresholdMode::ExactMixture)};
    r.closed = {evaluate(s, pf, ThresholdMode::ClosedForm), evaluate(s, ps, ThresholdMode::ClosedForm)};

    r.beta_a = beta(s, Group::A);
    r.beta_b = beta(s, Group::B);
    r.delta_a = delta(s, Group::A);
    r.delta_b = delta(s, Group::B);
    r.eta_with_test = eta(s, s.a.access, s.b.access, r.constants.rho_b_full);
    r.eta_without_test = eta(s, 1.0, 1.0, r.constants.rho_b_sub);
    r.diversity_condition_holds = diversity_condition_no_barriers(s);

    double paf = total_precision(s, Group::A, FeatureSet::full());
    double pbf = total_precision(s, Group::B, FeatureSet::full());
    bool unequal = !nearly_equal(paf, pbf);
    if (unequal) {
        double t = r.closed.full.thresholds.for_group(Group::A);
        if (!tau) {
            r.q_e = q_e(s, FeatureSet::full(), t);
            r.if_crossing = if_crossing_no_aa(s, FeatureSet::full(), t);
        } else {
            r.if_crossing = if_crossing_aa(s, FeatureSet::full(),
                                           r.closed.full.thresholds.for_group(Group::A),
                                           r.closed.full.thresholds.for_group(Group::B));
        }
    }
    if (!r.barriers && !tau) {
        for (Group g : {Group::A, Group::B}) {
            try {
                (g == Group::A ? r.q_crossing_a : r.q_crossing_b) = drop_crossing_q(s, g);
            } catch (const ModelError&) {
            }
        }
    }

    if (tau) {
        r.gamma_hat_a = gamma_hat(s, Group::A, *tau);
        r.gamma_hat_b = gamma_hat(s, Group::B, *tau);
        // Under AA the diversity is pinned at tau; merit per group follows gamma vs gamma_hat.
        bool a_up = s.a.access <= *r.gamma_hat_a;
        bool b_up = s.b.access <= *r.gamma_hat_b;
        r.verdicts["merit_a_improves_on_drop"] = {a_up, std::nullopt};
        r.verdicts["merit_b_improves_on_drop"] = {b_up, std::nullopt};
        r.merit_verdict = merit_words(a_up, b_up);
        r.diversity_verdict = "unchanged";
    } else {
        bool div_up = r.barriers ? diversity_improves_on_drop_barriers(s)
                                 : r.diversity_condition_holds;
        bool a_up = merit_improves_on_drop(s, Group::A);
        bool b_up = merit_improves_on_drop(s, Group::B);
        r.verdicts["diversity_improves_on_drop"] = {div_up, std::nullopt};
        r.verdicts["merit_a_improves_on_drop"] = {a_up, std::nullopt};
        r.verdicts["merit_b_improves_on_drop"] = {b_up, std::nullopt};
        r.diversity_verdict = diversity_word(r.closed.full.diversity, r.closed.subset.diversity);
        r.merit_verdict = merit_words(r.closed.subset.merit_a > r.closed.full.merit_a,
                                      r.closed.subset.merit_b > r.closed.full.merit_b);
    }

    if (mc && mc->n_students > 0) {
        McConfig cfg;
        cfg.seed = mc->seed;
        cfg.n_students = mc->n_students;
        cfg.threads = mc->threads;
        auto mf = simulate(s, pf, cfg);
        auto ms = simulate(s, ps, cfg);
        auto flag = [&](const std::string& name, const McOutcome& m, const PolicyOutcome& e) {
            double slack = 1.0 / static_cast<double>(m.n_admitted);
            r.mc_agreement[name + ".diversity"] = within(m.diversity.value, m.diversity.se, e.diversity, slack);
            r.mc_agreement[name + ".merit_a"] = within(m.merit_a.value, m.merit_a.se, e.merit_a);
            r.mc_agreement[name + ".merit_b"] = within(m.merit_b.value, m.merit_b.se, e.merit_b);
        };
        flag("full", mf, r.exact.full);
        flag("subset", ms, r.exact.subset);
        if (!tau) r.verdicts["diversity_improves_on_drop"].monte_carlo = ms.diversity.value > mf.diversity.value;
        r.verdicts["merit_a_improves_on_drop"].monte_carlo = ms.merit_a.value > mf.merit_a.value;
        r.verdicts["merit_b_improves_on_drop"].monte_carlo = ms.merit_b.value > mf.merit_b.value;
    }
    return r;
}

}  // namespace admitlab
