#include "admitlab/montecarlo.hpp"

#include "admitlab/errors.hpp"
#include "admitlab/estimation.hpp"
#include "admitlab/rng.hpp"
#include "admitlab/statfns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace admitlab {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ADMITLAB_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2 * static_cast<std::size_t>(threads)) {
        body(0, n);
        return;
    }
    std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        workers.emplace_back([&body, b, e] { body(b, e); });
    }
}

Population draw_population(const Scenario& s, std::uint64_t seed, std::size_t n, unsigned threads) {
    Population pop;
    pop.n = n;
    pop.K = s.num_features();
    pop.is_b.resize(n);
    pop.has_access.resize(n);
    pop.skill.resize(n);
    pop.theta.resize(n * pop.K);

    const CounterRng rng(seed);
    const std::uint64_t stride = pop.K + 3;
    const double sigma = s.sigma();
    parallel_for(n, resolve_threads(threads), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const std::uint64_t base = i * stride;
            bool is_b = rng.uniform_at(base) < s.pi;
            Group g = is_b ? Group::B : Group::A;
            const auto& gp = s.params(g);
            pop.is_b[i] = is_b;
            pop.has_access[i] = rng.uniform_at(base + 1) < gp.access;
            double q = s.prior_mean + sigma * rng.normal_at(base + 2);
            pop.skill[i] = q;
            for (std::size_t k = 0; k < pop.K; ++k) {
                const auto& fn = gp.features[k];
                pop.theta[i * pop.K + k] = q + fn.bias + std::sqrt(fn.variance) * rng.normal_at(base + 3 + k);
            }
        }
    });
    return pop;
}

std::vector<double> compute_estimates(const Scenario& s, const Population& pop, const FeatureSet& f,
                                      Estimation est, unsigned threads) {
    Estimator e(s, f);
    const auto& idx = e.indices();
    std::vector<double> out(pop.n);
    parallel_for(pop.n, resolve_threads(threads), [&](std::size_t b, std::size_t end) {
        std::vector<double> th(idx.size());
        for (std::size_t i = b; i < end; ++i) {
            for (std::size_t j = 0; j < idx.size(); ++j) th[j] = pop.theta[i * pop.K + idx[j]];
            out[i] = est == Estimation::GroupAware ? e.aware_mean(pop.group(i), th.data())
                                                   : e.unaware_mean(th.data());
        }
    });
    return out;
}

std::vector<std::size_t> select_top(const std::vector<double>& est, std::vector<std::size_t> pool,
                                    std::size_t k) {
    if (k > pool.size()) throw ModelError("cannot admit more students than applied");
    auto better = [&](std::size_t i, std::size_t j) {
        return est[i] > est[j] || (est[i] == est[j] && i < j);
    };
    if (k < pool.size()) std::nth_element(pool.begin(), pool.begin() + k, pool.end(), better);
    pool.resize(k);
    return pool;
}

Thresholds McOutcome::empirical_thresholds() const {
    if (threshold_hat_per_group) return {std::nullopt, threshold_hat_per_group};
    return {threshold_hat, std::nullopt};
}

namespace {

struct RangeResult {
    std::uint64_t n_app = 0, k = 0;
    std::uint64_t cnt_a = 0, cnt_b = 0;
    double sum_a = 0.0, sum_b = 0.0;
    double min_all = 0.0, min_a = 0.0, min_b = 0.0;
};

struct Admission {
    const Scenario& s;
    const Policy& p;
    const Population& pop;
    const std::vector<double>& est;
    bool needs_test;
    double mass;

    RangeResult run(std::size_t b, std::size_t e) const {
        RangeResult r;
        std::vector<std::size_t> pool_all, pool_a, pool_b;
        for (std::size_t i = b; i < e; ++i) {
            if (needs_test && !pop.has_access[i]) continue;
            pool_all.push_back(i);
            (pop.is_b[i] ? pool_b : pool_a).push_back(i);
        }
        r.n_app = pool_all.size();
        r.k = static_cast<std::uint64_t>(std::floor(static_cast<double>(r.n_app) * s.capacity / mass));
        auto tally = [&](const std::vector<std::size_t>& chosen) {
            for (std::size_t i : chosen) {
                if (pop.is_b[i]) {
                    ++r.cnt_b;
                    r.sum_b += pop.skill[i];
                } else {
                    ++r.cnt_a;
                    r.sum_a += pop.skill[i];
                }
            }
        };
        auto min_est = [&](const std::vector<std::size_t>& chosen) {
            double m = HUGE_VAL;
            for (std::size_t i : chosen) m = std::min(m, est[i]);
            return m;
        };
        if (p.aa_target) {
            auto kb = static_cast<std::uint64_t>(std::llround(*p.aa_target * static_cast<double>(r.k)));
            auto ka = r.k - kb;
            auto ca = select_top(est, std::move(pool_a), ka);
            auto cb = select_top(est, std::move(pool_b), kb);
            tally(ca);
            tally(cb);
            r.min_a = min_est(ca);
            r.min_b = min_est(cb);
            r.min_all = std::min(r.min_a, r.min_b);
        } else {
            auto c = select_top(est, std::move(pool_all), r.k);
            tally(c);
            r.min_all = min_est(c);
        }
        return r;
    }
};

McEstimate batch(const std::vector<double>& vals, double full_value) {
    McEstimate m{full_value, 0.0};
    if (vals.size() < 2) return m;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    m.se = sd / std::sqrt(static_cast<double>(vals.size()));
    return m;
}

}  // namespace

McOutcome simulate(const Scenario& s, const Policy& p, const McConfig& cfg) {
    require_valid(s, p);
    const unsigned threads = resolve_threads(cfg.threads);
    auto pop = draw_population(s, cfg.seed, cfg.n_students, threads);
    auto est = compute_estimates(s, pop, p.features, p.estimation, threads);

    auto [ga, gb] = effective_access(s, p.features);
    Admission adm{s, p, pop, est, p.features.contains_test(s.num_features()),
                  (1.0 - s.pi) * ga + s.pi * gb};

    RangeResult full = adm.run(0, pop.n);
    if (full.k == 0) throw ModelError("simulation admits nobody; increase n_students");

    McOutcome out;
    out.n_students = pop.n;
    out.n_applicants = full.n_app;
    out.target_count = full.k;
    out.n_admitted = full.cnt_a + full.cnt_b;
    out.n_admitted_b = full.cnt_b;
    double kk = static_cast<double>(out.n_admitted);
    double div = static_cast<double>(full.cnt_b) / kk;
    double ma = full.cnt_a ? full.sum_a / full.cnt_a : NAN;
    double mb = full.cnt_b ? full.sum_b / full.cnt_b : NAN;
    double mo = (full.sum_a + full.sum_b) / kk;
    if (p.aa_target) out.threshold_hat_per_group = std::make_pair(full.min_a, full.min_b);
    else out.threshold_hat = full.min_all;

    // Standard errors from independent contiguous batches, each running its own selection.
    const unsigned B = std::max(2u, cfg.se_blocks);
    std::vector<RangeResult> blocks(B);
    parallel_for(B, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j)
            blocks[j] = adm.run(j * pop.n / B, (j + 1) * pop.n / B);
    });
    std::vector<double> vd, va, vb, vo;
    for (const auto& r : blocks) {
        double n_adm = static_cast<double>(r.cnt_a + r.cnt_b);
        if (n_adm == 0) continue;
        vd.push_back(static_cast<double>(r.cnt_b) / n_adm);
        vo.push_back((r.sum_a + r.sum_b) / n_adm);
        if (r.cnt_a) va.push_back(r.sum_a / r.cnt_a);
        if (r.cnt_b) vb.push_back(r.sum_b / r.cnt_b);
    }
    out.diversity = batch(vd, div);
    out.merit_a = batch(va, ma);
    out.merit_b = batch(vb, mb);
    out.merit_overall = batch(vo, mo);
    return out;
}

McOutcome unaware_policy_eval(const Scenario& s, const Policy& p, const McConfig& cfg) {
    Policy q = p;
    q.estimation = Estimation::GroupUnaware;
    q.aa_target.reset();
    return simulate(s, q, cfg);
}

std::vector<GapPoint> if_gap_empirical(const Scenario& s, const Policy& p, const McConfig& cfg,
                                       const std::vector<double>& q_grid, const Thresholds& t) {
    Estimator e(s, p.features);
    const auto& idx = e.indices();
    const std::uint64_t m = std::max<std::uint64_t>(1, cfg.gap_draws);
    std::vector<GapPoint> out(q_grid.size());
    parallel_for(q_grid.size(), resolve_threads(cfg.threads), [&](std::size_t b, std::size_t end) {
        std::vector<double> th(idx.size());
        for (std::size_t j = b; j < end; ++j) {
            double prob[2];
            for (Group g : {Group::A, Group::B}) {
                std::size_t gi = g == Group::A ? 0 : 1;
                const CounterRng rng(cfg.seed, 1 + 2 * j + gi);
                const auto& feats = s.params(g).features;
                std::uint64_t hits = 0;
                for (std::uint64_t d = 0; d < m; ++d) {
                    for (std::size_t u = 0; u < idx.size(); ++u) {
                        const auto& fn = feats[idx[u]];
                        th[u] = q_grid[j] + fn.bias +
                                std::sqrt(fn.variance) * rng.normal_at(d * idx.size() + u);
                    }
                    double q_tilde = p.estimation == Estimation::GroupAware ? e.aware_mean(g, th.data())
                                                                            : e.unaware_mean(th.data());
                    if (admit(q_tilde, g, t)) ++hits;
                }
                prob[gi] = static_cast<double>(hits) / static_cast<double>(m);
            }
            double md = static_cast<double>(m);
            out[j] = {q_grid[j], prob[0] - prob[1],
                      std::sqrt(prob[0] * (1 - prob[0]) / md + prob[1] * (1 - prob[1]) / md),
                      prob[0], prob[1]};
        }
    });
    return out;
}

std::vector<GapPoint> if_gap_empirical(const Scenario& s, const Policy& p, const McConfig& cfg,
                                       const std::vector<double>& q_grid) {
    Thresholds t = p.estimation == Estimation::GroupAware ? thresholds_for(s, p)
                                                          : simulate(s, p, cfg).empirical_thresholds();
    return if_gap_empirical(s, p, cfg, q_grid, t);
}

double cutoff_standard_error(const Scenario& s, const FeatureSet& f, double threshold,
                             std::uint64_t n_applicants) {
    auto [ga, gb] = effective_access(s, f);
    double wa = (1.0 - s.pi) * ga, wb = s.pi * gb, mass = wa + wb;
    double p = s.capacity / mass;
    double dens = 0.0;
    for (Group g : {Group::A, Group::B}) {
        double w = (g == Group::A ? wa : wb) / mass;
        double sd = estimate_law(s, g, f).sd();
        dens += w * stat::pdf((threshold - s.prior_mean) / sd) / sd;
    }
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n_applicants)) / dens;
}

}  // namespace admitlab
