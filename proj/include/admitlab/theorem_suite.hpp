#pragma once

#include "admitlab/analysis.hpp"
#include "admitlab/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace admitlab {

struct SuiteOptions {
    std::size_t scenarios = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    EtaPrefactor eta = EtaPrefactor::Definitional;
    std::optional<double> fixed_pi;
};

struct SuiteFailure {
    std::string property;
    std::size_t index = 0;
    Scenario scenario;
    std::optional<double> tau;
    std::string detail;
};

struct PropertyTally {
    std::size_t checked = 0;
    std::size_t failed = 0;
};

struct SuiteSummary {
    std::map<std::string, PropertyTally> tally;
    std::vector<SuiteFailure> failures;  // ordered by scenario index, then property

    bool ok() const { return failures.empty(); }
};

// Predicate-versus-metric checks on random validated scenarios (closed-form thresholds):
//   no_barriers_merit      merit(Full) > merit(Subset) for both groups
//   no_barriers_diversity  precision condition <=> diversity rises on drop
//   barriers_merit         beta_g <= delta_g <=> group g's merit rises on drop
//   barriers_diversity     eta comparison <=> diversity rises on drop
//   barriers_eta_level     eta equals the diversity level with and without the test
//   aa_gamma_hat           AA merits with and without the test agree at gamma_hat
SuiteSummary run_theorem_suite(const SuiteOptions& opt);

}  // namespace admitlab
