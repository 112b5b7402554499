#include "admitlab/scenario_gen.hpp"

#include "admitlab/errors.hpp"

#include <cmath>

namespace admitlab {

Scenario random_scenario(CounterRng& rng, const ScenarioFamily& fam) {
    if (fam.min_features < 1 || fam.max_features < fam.min_features)
        throw ModelError("scenario family: bad feature-count range");
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Scenario s;
        s.prior_mean = rng.uniform(-1.0, 1.0);
        s.prior_variance = rng.uniform(0.5, 2.0);
        s.pi = rng.uniform(0.2, 0.8);
        if (fam.fixed_pi) s.pi = *fam.fixed_pi;
        s.capacity = rng.uniform(fam.min_capacity, fam.max_capacity);
        const std::size_t K =
            fam.min_features + rng.below(fam.max_features - fam.min_features + 1);
        for (GroupParams* gp : {&s.a, &s.b}) {
            gp->features.resize(K);
            for (auto& f : gp->features) {
                f.bias = rng.uniform(-fam.max_bias, fam.max_bias);
                // Log-uniform variance.
                f.variance = std::exp(rng.uniform(std::log(fam.min_variance), std::log(fam.max_variance)));
            }
        }
        if (fam.barriers) {
            s.a.access = rng.uniform(0.6, 1.0);
            s.b.access = rng.uniform(0.05, s.a.access);
        }
        if (fam.unequal_precision) {
            double pa = total_precision(s, Group::A, FeatureSet::full());
            double pb = total_precision(s, Group::B, FeatureSet::full());
            if (!(pa > pb * (1.0 + 1e-6))) std::swap(s.a.features, s.b.features);
            pa = total_precision(s, Group::A, FeatureSet::full());
            pb = total_precision(s, Group::B, FeatureSet::full());
            if (!(pa > pb * (1.0 + 1e-6))) continue;
        }
        if (validate(s).ok()) return s;
    }
    throw ModelError("scenario family: no valid draw within the attempt budget");
}

Scenario random_scenario(std::uint64_t seed, std::uint64_t index, const ScenarioFamily& fam) {
    CounterRng rng(seed, index);
    return random_scenario(rng, fam);
}

}  // namespace admitlab
