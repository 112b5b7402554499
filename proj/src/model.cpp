#include "admitlab/model.hpp"

#include "admitlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace admitlab {

double Scenario::sigma() const { return std::sqrt(prior_variance); }

FeatureSet FeatureSet::explicit_set(std::vector<int> one_based) {
    std::sort(one_based.begin(), one_based.end());
    one_based.erase(std::unique(one_based.begin(), one_based.end()), one_based.end());
    return FeatureSet(Kind::Explicit, std::move(one_based));
}

std::vector<std::size_t> FeatureSet::resolve(std::size_t K) const {
    std::vector<std::size_t> out;
    switch (kind_) {
    case Kind::Full:
        for (std::size_t k = 0; k < K; ++k) out.push_back(k);
        break;
    case Kind::Subset:
        for (std::size_t k = 0; k + 1 < K; ++k) out.push_back(k);
        break;
    case Kind::Explicit:
        for (int i : indices_) {
            if (i < 1 || static_cast<std::size_t>(i) > K)
                throw ModelError("feature index " + std::to_string(i) + " outside 1.." +
                                 std::to_string(K));
            out.push_back(static_cast<std::size_t>(i - 1));
        }
        break;
    }
    return out;
}

bool FeatureSet::contains_test(std::size_t K) const {
    switch (kind_) {
    case Kind::Full: return K >= 1;
    case Kind::Subset: return false;
    case Kind::Explicit:
        return std::find(indices_.begin(), indices_.end(), static_cast<int>(K)) != indices_.end();
    }
    return false;
}

std::string FeatureSet::describe() const {
    switch (kind_) {
    case Kind::Full: return "full";
    case Kind::Subset: return "subset";
    case Kind::Explicit: break;
    }
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < indices_.size(); ++i) os << (i ? "," : "") << indices_[i];
    os << ']';
    return os.str();
}

std::string ValidationReport::joined() const {
    std::string out;
    for (const auto& s : issues) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

std::pair<double, double> effective_access(const Scenario& s, const FeatureSet& f) {
    if (f.contains_test(s.num_features())) return {s.a.access, s.b.access};
    return {1.0, 1.0};
}

ValidationReport validate(const Scenario& s, const Policy& p) {
    ValidationReport r;
    auto add = [&](std::string msg) { r.issues.push_back(std::move(msg)); };

    if (!(s.prior_variance > 0.0) || !std::isfinite(s.prior_variance))
        add("prior variance must be positive");
    if (!std::isfinite(s.prior_mean)) add("prior mean must be finite");
    if (!(s.pi > 0.0 && s.pi < 1.0)) add("pi must lie in (0,1)");
    if (!(s.capacity > 0.0)) add("capacity must be positive");
    if (!(s.capacity < 0.5)) add("selectivity: capacity must be below 0.5");

    const std::size_t K = s.a.features.size();
    if (K == 0) add("at least one feature is required");
    if (s.b.features.size() != K) add("groups must have the same number of features");
    for (Group g : {Group::A, Group::B}) {
        const auto& gp = s.params(g);
        if (!(gp.access >= 0.0 && gp.access <= 1.0))
            add(std::string("access of group ") + to_string(g) + " must lie in [0,1]");
        for (std::size_t k = 0; k < gp.features.size(); ++k) {
            const auto& fn = gp.features[k];
            if (!(fn.variance > 0.0) || !std::isfinite(fn.variance))
                add(std::string("feature ") + std::to_string(k + 1) + " of group " + to_string(g) +
                    " must have positive finite variance");
            if (!std::isfinite(fn.bias))
                add(std::string("feature ") + std::to_string(k + 1) + " of group " + to_string(g) +
                    " must have finite bias");
        }
    }
    if (!r.ok()) return r;

    std::vector<std::size_t> idx;
    try {
        idx = p.features.resolve(K);
    } catch (const ModelError& e) {
        add(e.what());
        return r;
    }
    if (idx.empty()) add("empty feature set");

    auto [ga, gb] = effective_access(s, p.features);
    if (!(s.capacity < (1.0 - s.pi) * ga + s.pi * gb))
        add("over-demand: capacity must be below (1-pi) gamma_A + pi gamma_B");

    if (p.aa_target) {
        double tau = *p.aa_target;
        if (p.estimation == Estimation::GroupUnaware)
            add("affirmative action requires group-aware estimation");
        if (!(tau > 0.0 && tau < 1.0)) add("aa target must lie in (0,1)");
        if (tau > s.pi) add("aa target must not exceed pi");
        if (ga < 2.0 * (1.0 - tau) * s.capacity / (1.0 - s.pi))
            add("aa feasibility: gamma_A below 2(1-tau)C/(1-pi)");
        if (gb < 2.0 * tau * s.capacity / s.pi)
            add("aa feasibility: gamma_B below 2 tau C / pi");
    }
    return r;
}

void require_valid(const Scenario& s, const Policy& p) {
    auto r = validate(s, p);
    if (!r.ok()) throw ModelError("invalid scenario: " + r.joined());
}

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += x[i];
        return acc;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double total_precision(const Scenario& s, Group g, const FeatureSet& f) {
    const auto& feats = s.params(g).features;
    std::vector<double> prec;
    for (std::size_t k : f.resolve(feats.size())) prec.push_back(1.0 / feats[k].variance);
    return pairwise_sum(prec.data(), prec.size());
}

double shrinkage(const Scenario& s, Group g, const FeatureSet& f) {
    double P = total_precision(s, g, f);
    return P / (s.prior_precision() + P);
}

bool nearly_equal(double x, double y, double rel) {
    return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y));
}

}  // namespace admitlab
