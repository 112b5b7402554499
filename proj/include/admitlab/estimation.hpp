#pragma once

#include "admitlab/model.hpp"

#include <array>
#include <span>
#include <vector>

namespace admitlab {

struct PosteriorPoint {
    double mean = 0.0;
    double variance = 0.0;
};

// Law of the estimate q~ across students of a group: N(mu, sigma^2 v).
struct EstimateLaw {
    double mean = 0.0;
    double variance = 0.0;
    double shrinkage = 0.0;
    double sd() const;
};

// Law of q~ given true skill q.
struct EstimateGivenSkillLaw {
    double mean = 0.0;
    double variance = 0.0;
};

struct UnawareWeights {
    double a = 0.5;
    double b = 0.5;
};

// theta holds one value per feature of the set, in increasing index order.
PosteriorPoint posterior(const Scenario& s, Group g, const FeatureSet& f,
                         std::span<const double> theta);
EstimateLaw estimate_law(const Scenario& s, Group g, const FeatureSet& f);
EstimateGivenSkillLaw estimate_given_skill(const Scenario& s, Group g, const FeatureSet& f,
                                           double q);
PosteriorPoint skill_given_estimate(const Scenario& s, Group g, const FeatureSet& f,
                                    double q_tilde);

// Posterior group probabilities for a student whose group is hidden. The group prior is the
// applicant-pool share, i.e. (1-pi) gamma_A : pi gamma_B when the set requires the test.
UnawareWeights unaware_weights(const Scenario& s, const FeatureSet& f,
                               std::span<const double> theta);
double unaware_posterior_mean(const Scenario& s, const FeatureSet& f,
                              std::span<const double> theta);

// Precomputed linear estimators for repeated evaluation (Monte Carlo, calibration).
class Estimator {
public:
    Estimator(const Scenario& s, const FeatureSet& f);

    std::size_t dim() const { return idx_.size(); }
    const std::vector<std::size_t>& indices() const { return idx_; }

    double aware_mean(Group g, const double* theta) const;
    double posterior_variance(Group g) const { return post_var_[gi(g)]; }
    UnawareWeights weights(const double* theta) const;
    double unaware_mean(const double* theta) const;

private:
    static std::size_t gi(Group g) { return g == Group::A ? 0 : 1; }

    std::vector<std::size_t> idx_;
    double prior_mean_;
    double prior_prec_;
    std::array<double, 2> post_var_{};
    std::array<std::vector<double>, 2> bias_;
    std::array<std::vector<double>, 2> prec_;
    std::array<double, 2> log_prior_{};
    std::array<double, 2> log_norm_{};
};

}  // namespace admitlab
