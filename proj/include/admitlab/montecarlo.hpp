#pragma once

#include "admitlab/model.hpp"
#include "admitlab/selection.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace admitlab {

struct McConfig {
    std::uint64_t seed = 1;
    std::uint64_t n_students = 100000;
    unsigned threads = 0;           // 0: ADMITLAB_THREADS or hardware concurrency
    unsigned se_blocks = 100;       // batch count for standard errors
    std::uint64_t gap_draws = 20000;  // per grid point and group in if_gap_empirical
};

// Resolved worker count: explicit request, else ADMITLAB_THREADS, else hardware concurrency.
unsigned resolve_threads(unsigned requested);

// Runs body(begin, end) over a fixed partition of [0, n). Each index must be written by exactly
// one call so results do not depend on the worker count.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

// One simulated cohort. theta is row-major n x K with every feature drawn, used or not.
struct Population {
    std::size_t n = 0;
    std::size_t K = 0;
    std::vector<std::uint8_t> is_b;
    std::vector<std::uint8_t> has_access;
    std::vector<double> skill;
    std::vector<double> theta;

    Group group(std::size_t i) const { return is_b[i] ? Group::B : Group::A; }
};

// Student i uses counters i*(K+3) + slot: slot 0 group, 1 access, 2 skill, 3+k feature k.
Population draw_population(const Scenario& s, std::uint64_t seed, std::size_t n, unsigned threads);

std::vector<double> compute_estimates(const Scenario& s, const Population& pop, const FeatureSet& f,
                                      Estimation est, unsigned threads);

// Indices of the k largest estimates among pool, ties broken by lower index. Order unspecified.
std::vector<std::size_t> select_top(const std::vector<double>& est, std::vector<std::size_t> pool,
                                    std::size_t k);

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
};

struct McOutcome {
    McEstimate diversity;
    McEstimate merit_a;
    McEstimate merit_b;
    McEstimate merit_overall;
    // Smallest admitted estimate (per group under AA).
    std::optional<double> threshold_hat;
    std::optional<std::pair<double, double>> threshold_hat_per_group;
    std::uint64_t n_students = 0;
    std::uint64_t n_applicants = 0;
    std::uint64_t n_admitted = 0;
    std::uint64_t n_admitted_b = 0;
    std::uint64_t target_count = 0;

    Thresholds empirical_thresholds() const;
};

// Exact-count admission: top floor(n_applicants * C / applicant_mass) by estimate.
McOutcome simulate(const Scenario& s, const Policy& p, const McConfig& cfg);
McOutcome unaware_policy_eval(const Scenario& s, const Policy& p, const McConfig& cfg);

struct GapPoint {
    double q = 0.0;
    double gap = 0.0;
    double se = 0.0;
    double prob_a = 0.0;
    double prob_b = 0.0;
};

// Conditional simulation of admission frequencies at fixed skill against the given thresholds.
std::vector<GapPoint> if_gap_empirical(const Scenario& s, const Policy& p, const McConfig& cfg,
                                       const std::vector<double>& q_grid, const Thresholds& t);
// Thresholds: closed-form for aware policies, the simulated cutoff for unaware ones.
std::vector<GapPoint> if_gap_empirical(const Scenario& s, const Policy& p, const McConfig& cfg,
                                       const std::vector<double>& q_grid);

// Asymptotic standard error of the empirical cutoff around the exact common threshold.
double cutoff_standard_error(const Scenario& s, const FeatureSet& f, double threshold,
                             std::uint64_t n_applicants);

}  // namespace admitlab
