#include "admitlab/estimation.hpp"

#include "admitlab/errors.hpp"

#include <cmath>
#include <limits>

namespace admitlab {

double EstimateLaw::sd() const { return std::sqrt(variance); }

Estimator::Estimator(const Scenario& s, const FeatureSet& f)
    : idx_(f.resolve(s.num_features())), prior_mean_(s.prior_mean),
      prior_prec_(s.prior_precision()) {
    auto [ga, gb] = effective_access(s, f);
    const double pool[2] = {(1.0 - s.pi) * ga, s.pi * gb};
    for (Group g : {Group::A, Group::B}) {
        auto i = gi(g);
        const auto& feats = s.params(g).features;
        std::vector<double> prec;
        double log_var = 0.0;
        for (std::size_t k : idx_) {
            bias_[i].push_back(feats[k].bias);
            prec.push_back(1.0 / feats[k].variance);
            log_var += std::log(feats[k].variance);
        }
        double P = pairwise_sum(prec.data(), prec.size());
        prec_[i] = std::move(prec);
        post_var_[i] = 1.0 / (prior_prec_ + P);
        // Marginal of theta given g is N(mu + bias, D + sigma^2 1 1'); its log-determinant is
        // sum log d_k + log(1 + sigma^2 P).
        log_norm_[i] = -0.5 * log_var - 0.5 * std::log1p(P / prior_prec_);
        log_prior_[i] = pool[i] > 0.0 ? std::log(pool[i])
                                      : -std::numeric_limits<double>::infinity();
    }
}

double Estimator::aware_mean(Group g, const double* theta) const {
    auto i = gi(g);
    double acc = prior_mean_ * prior_prec_;
    for (std::size_t k = 0; k < idx_.size(); ++k) acc += (theta[k] - bias_[i][k]) * prec_[i][k];
    return acc * post_var_[i];
}

UnawareWeights Estimator::weights(const double* theta) const {
    double logw[2];
    for (std::size_t i = 0; i < 2; ++i) {
        // Sherman-Morrison form of r' (D + sigma^2 1 1')^{-1} r.
        double sq = 0.0, lin = 0.0;
        for (std::size_t k = 0; k < idx_.size(); ++k) {
            double r = theta[k] - prior_mean_ - bias_[i][k];
            sq += r * r * prec_[i][k];
            lin += r * prec_[i][k];
        }
        double quad = sq - lin * lin * post_var_[i];
        logw[i] = log_prior_[i] + log_norm_[i] - 0.5 * quad;
    }
    if (std::isinf(logw[0]) && logw[0] < 0) return {0.0, 1.0};
    if (std::isinf(logw[1]) && logw[1] < 0) return {1.0, 0.0};
    double m = std::max(logw[0], logw[1]);
    double ea = std::exp(logw[0] - m), eb = std::exp(logw[1] - m);
    double tot = ea + eb;
    return {ea / tot, eb / tot};
}

double Estimator::unaware_mean(const double* theta) const {
    auto w = weights(theta);
    return w.a * aware_mean(Group::A, theta) + w.b * aware_mean(Group::B, theta);
}

namespace {
void check_dim(const Scenario& s, const FeatureSet& f, std::size_t n) {
    auto d = f.resolve(s.num_features()).size();
    if (d != n)
        throw ModelError("theta has " + std::to_string(n) + " entries, feature set has " +
                         std::to_string(d));
}
}  // namespace

PosteriorPoint posterior(const Scenario& s, Group g, const FeatureSet& f,
                         std::span<const double> theta) {
    check_dim(s, f, theta.size());
    Estimator e(s, f);
    return {e.aware_mean(g, theta.data()), e.posterior_variance(g)};
}

EstimateLaw estimate_law(const Scenario& s, Group g, const FeatureSet& f) {
    double v = shrinkage(s, g, f);
    return {s.prior_mean, s.prior_variance * v, v};
}

EstimateGivenSkillLaw estimate_given_skill(const Scenario& s, Group g, const FeatureSet& f,
                                           double q) {
    double P = total_precision(s, g, f);
    double d = s.prior_precision() + P;
    return {(s.prior_mean * s.prior_precision() + q * P) / d, P / (d * d)};
}

PosteriorPoint skill_given_estimate(const Scenario& s, Group g, const FeatureSet& f,
                                    double q_tilde) {
    double P = total_precision(s, g, f);
    return {q_tilde, 1.0 / (s.prior_precision() + P)};
}

UnawareWeights unaware_weights(const Scenario& s, const FeatureSet& f,
                               std::span<const double> theta) {
    check_dim(s, f, theta.size());
    return Estimator(s, f).weights(theta.data());
}

double unaware_posterior_mean(const Scenario& s, const FeatureSet& f,
                              std::span<const double> theta) {
    check_dim(s, f, theta.size());
    return Estimator(s, f).unaware_mean(theta.data());
}

}  // namespace admitlab
