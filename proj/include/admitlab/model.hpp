#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace admitlab {

enum class Group { A, B };

inline Group other(Group g) { return g == Group::A ? Group::B : Group::A; }
inline const char* to_string(Group g) { return g == Group::A ? "A" : "B"; }

// Additive feature noise: theta_k = q + eps_k, eps_k ~ N(bias, variance).
struct FeatureNoise {
    double bias = 0.0;
    double variance = 1.0;
};

struct GroupParams {
    std::vector<FeatureNoise> features;
    double access = 1.0;  // fraction of the group able to submit the test (feature K)
};

struct Scenario {
    double prior_mean = 0.0;
    double prior_variance = 1.0;
    double pi = 0.5;  // mass of group B
    double capacity = 0.2;
    GroupParams a;
    GroupParams b;

    const GroupParams& params(Group g) const { return g == Group::A ? a : b; }
    GroupParams& params(Group g) { return g == Group::A ? a : b; }
    std::size_t num_features() const { return a.features.size(); }
    double sigma() const;
    double prior_precision() const { return 1.0 / prior_variance; }
    // Population share of a group: 1 - pi for A, pi for B.
    double share(Group g) const { return g == Group::A ? 1.0 - pi : pi; }
    double access(Group g) const { return params(g).access; }
};

// Which features the school uses. Indices are 1-based; the test is always index K.
class FeatureSet {
public:
    enum class Kind { Full, Subset, Explicit };

    static FeatureSet full() { return FeatureSet(Kind::Full, {}); }
    static FeatureSet subset() { return FeatureSet(Kind::Subset, {}); }
    static FeatureSet empty() { return FeatureSet(Kind::Explicit, {}); }
    static FeatureSet explicit_set(std::vector<int> one_based);

    Kind kind() const { return kind_; }
    const std::vector<int>& explicit_indices() const { return indices_; }

    // 0-based feature indices for a scenario with K features. Throws ModelError when out of range.
    std::vector<std::size_t> resolve(std::size_t K) const;
    bool contains_test(std::size_t K) const;
    std::string describe() const;

    bool operator==(const FeatureSet&) const = default;

private:
    FeatureSet(Kind k, std::vector<int> idx) : kind_(k), indices_(std::move(idx)) {}
    Kind kind_;
    std::vector<int> indices_;
};

enum class Estimation { GroupAware, GroupUnaware };

struct Policy {
    FeatureSet features = FeatureSet::full();
    std::optional<double> aa_target;  // target diversity tau
    Estimation estimation = Estimation::GroupAware;

    static Policy full() { return {}; }
    static Policy subset() { return {FeatureSet::subset(), std::nullopt, Estimation::GroupAware}; }
};

enum class ThresholdMode { ExactMixture, ClosedForm };

struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
    std::string joined() const;
};

ValidationReport validate(const Scenario& s, const Policy& p = Policy::full());
// Throws ModelError listing every issue when the report is not empty.
void require_valid(const Scenario& s, const Policy& p = Policy::full());

double total_precision(const Scenario& s, Group g, const FeatureSet& f);
// v_g(S) = P / (sigma^-2 + P).
double shrinkage(const Scenario& s, Group g, const FeatureSet& f);

// Access rates seen by a policy: the scenario's rates when the test is required, 1 otherwise.
std::pair<double, double> effective_access(const Scenario& s, const FeatureSet& f);

// Relative comparison used for the "equal precision" case split.
bool nearly_equal(double x, double y, double rel = 1e-12);

// Pairwise summation, used for precision totals.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace admitlab
