#pragma once

#include "admitlab/metrics.hpp"
#include "admitlab/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace admitlab {

struct InfoConstants {
    double v_a_full = 0.0, v_b_full = 0.0;
    double v_a_sub = 0.0, v_b_sub = 0.0;
    double rho_a_full = 1.0, rho_b_full = 1.0;  // rho^A = v_B / v_A, rho^B = 1 / rho^A
    double rho_a_sub = 1.0, rho_b_sub = 1.0;
    double xi_a = 1.0, xi_b = 1.0;  // v_g(Subset) / v_g(Full)

    double rho_full(Group g) const { return g == Group::A ? rho_a_full : rho_b_full; }
    double rho_sub(Group g) const { return g == Group::A ? rho_a_sub : rho_b_sub; }
    double xi(Group g) const { return g == Group::A ? xi_a : xi_b; }
};

InfoConstants info_constants(const Scenario& s);

// Standardized common threshold of group g under the closed-form threshold with access rates
// (gamma_A, gamma_B) and variance ratio rho^g.
double beta(const Scenario& s, Group g, double gamma_a, double gamma_b, double rho_g);
// Full features, scenario access rates.
double beta(const Scenario& s, Group g);

// HR^{-1}(scale * HR(quantile(1-C) sqrt(share_g + share_other * rho))).
double delta_formula(double scale, double capacity, double share_g, double share_other,
                     double rho);
// Standardized threshold group g would need under Full for its merit to match the
// no-test merit. The hazard scale is sqrt(xi_g) = sd ratio of the estimates.
double delta(const Scenario& s, Group g);

// Closed-form merit of group g with and without the test (closed-form thresholds; the
// no-test policy has no barriers).
double merit_full_closed(const Scenario& s, Group g);
double merit_subset_closed(const Scenario& s, Group g);

bool merit_improves_on_drop(const Scenario& s, Group g);

// Access rate of group g at which beta_g = delta_g, located by bisecting the closed-form merit
// difference over gamma_g (other access fixed). Empty when the difference keeps one sign.
std::optional<double> gamma_bar_bar(const Scenario& s, Group g);

enum class EtaPrefactor { Definitional, Literal };

// Closed-form diversity as a function of access rates and the group-B variance ratio.
double eta(const Scenario& s, double gamma_a, double gamma_b, double rho_b,
           EtaPrefactor pref = EtaPrefactor::Definitional);
bool diversity_improves_on_drop_barriers(const Scenario& s,
                                         EtaPrefactor pref = EtaPrefactor::Definitional);

// Precision form and shrinkage-ratio form of the no-barrier diversity condition.
bool diversity_condition_no_barriers(const Scenario& s);
bool diversity_condition_shrinkage(const Scenario& s);

enum class GammaHatForm { Derived, Literal };

// Access threshold under affirmative action: dropping the test improves group g's merit
// iff gamma_g <= gamma_hat. Derived form carries the 1/share_g factor of the per-group quantile.
double gamma_hat(const Scenario& s, Group g, double tau, GammaHatForm form = GammaHatForm::Derived);
// AA merit of group g under the given feature set with group g's access overridden.
double aa_merit(const Scenario& s, Group g, const FeatureSet& f, double tau, double gamma_g);

// Point beyond which the fairness gap is decreasing (unequal precisions only).
double q_e(const Scenario& s, const FeatureSet& f, double threshold);
// Skill at which the fairness gap changes sign, common threshold.
double if_crossing_no_aa(const Scenario& s, const FeatureSet& f, double threshold);
// Same with per-group thresholds.
double if_crossing_aa(const Scenario& s, const FeatureSet& f, double t_a, double t_b);
// Skill below which group g's admission probability rises when the test is dropped
// (closed-form thresholds, no barriers).
double drop_crossing_q(const Scenario& s, Group g);
// Largest skill where I(q; Full) - I(q; Subset) changes sign, located numerically.
std::optional<double> q_hat(const Scenario& s);

struct Verdict {
    bool closed_form = false;
    std::optional<bool> monte_carlo;
};

struct MetricsPair {
    PolicyOutcome full;
    PolicyOutcome subset;
};

struct TheoremReport {
    bool barriers = false;
    std::optional<double> aa_target;
    InfoConstants constants;
    MetricsPair exact;
    MetricsPair closed;
    double beta_a = 0.0, beta_b = 0.0;
    double delta_a = 0.0, delta_b = 0.0;
    double eta_with_test = 0.0, eta_without_test = 0.0;
    std::optional<double> gamma_hat_a, gamma_hat_b;
    std::optional<double> q_e;
    std::optional<double> q_crossing_a, q_crossing_b;
    std::optional<double> if_crossing;
    bool diversity_condition_holds = false;
    std::string diversity_verdict;  // "improves" / "worsens" / "unchanged"
    std::string merit_verdict;      // "worsens for both groups", ...
    std::map<std::string, Verdict> verdicts;
    std::map<std::string, bool> mc_agreement;
};

struct McBudget {
    std::uint64_t n_students = 0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// Drop-the-test comparison (Full vs Subset), optionally with affirmative action at tau.
TheoremReport compare_policies(const Scenario& s, std::optional<double> tau = std::nullopt,
                               std::optional<McBudget> mc = std::nullopt);

}  // namespace admitlab
