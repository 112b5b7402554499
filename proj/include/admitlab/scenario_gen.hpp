#pragma once

#include "admitlab/model.hpp"
#include "admitlab/rng.hpp"

#include <cstdint>
#include <optional>

namespace admitlab {

struct ScenarioFamily {
    bool barriers = false;           // draw gamma_B <= gamma_A < 1, else both 1
    bool unequal_precision = true;   // require P_A(Full) > P_B(Full)
    std::size_t min_features = 2;
    std::size_t max_features = 3;
    double min_variance = 0.2;       // feature noise variance range
    double max_variance = 3.0;
    double max_bias = 0.5;
    double min_capacity = 0.05;
    double max_capacity = 0.45;
    std::optional<double> fixed_pi;  // overrides the drawn group-B share
};

// Draws until the scenario validates (including over-demand under the test requirement).
Scenario random_scenario(CounterRng& rng, const ScenarioFamily& fam = {});

// Independent draw number `index` of a family, reproducible in isolation.
Scenario random_scenario(std::uint64_t seed, std::uint64_t index, const ScenarioFamily& fam = {});

}  // namespace admitlab
