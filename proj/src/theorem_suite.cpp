#include "admitlab/theorem_suite.hpp"

#include "admitlab/errors.hpp"
#include "admitlab/metrics.hpp"
#include "admitlab/montecarlo.hpp"
#include "admitlab/scenario_gen.hpp"

#include <cmath>
#include <sstream>

namespace admitlab {

namespace {

constexpr double kTie = 1e-12;

struct Check {
    std::string property;
    bool pass;
    std::string detail;
    const Scenario* scenario;
    std::optional<double> tau;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

// "Rises on drop" with near-ties accepted either way.
bool agrees(bool predicate, double after_minus_before) {
    if (std::abs(after_minus_before) <= kTie) return true;
    return predicate == (after_minus_before > 0.0);
}

struct Draw {
    Scenario open, barred, aa;
    double tau = 0.0;
    std::vector<Check> checks;
};

void run_one(std::size_t i, const SuiteOptions& opt, Draw& d) {
    ScenarioFamily open_fam;
    open_fam.fixed_pi = opt.fixed_pi;
    ScenarioFamily barred_fam = open_fam;
    barred_fam.barriers = true;

    d.open = random_scenario(opt.seed, 4 * i, open_fam);
    for (Group g : {Group::A, Group::B}) {
        double diff = merit_full_closed(d.open, g) - merit_subset_closed(d.open, g);
        d.checks.push_back({"no_barriers_merit", diff > -kTie,
                            std::string("group ") + to_string(g) + " full-subset " + fmt(diff), &d.open, {}});
    }
    {
        double ddiv = evaluate(d.open, Policy::subset(), ThresholdMode::ClosedForm).diversity -
                      evaluate(d.open, Policy::full(), ThresholdMode::ClosedForm).diversity;
        bool pred = diversity_condition_no_barriers(d.open);
        d.checks.push_back({"no_barriers_diversity", agrees(pred, ddiv),
                            "predicate " + std::string(pred ? "true" : "false") + ", change " + fmt(ddiv), &d.open, {}});
    }

    d.barred = random_scenario(opt.seed, 4 * i + 1, barred_fam);
    for (Group g : {Group::A, Group::B}) {
        double diff = merit_subset_closed(d.barred, g) - merit_full_closed(d.barred, g);
        bool pred = merit_improves_on_drop(d.barred, g);
        d.checks.push_back({"barriers_merit", agrees(pred, diff),
                            std::string("group ") + to_string(g) + " beta " + fmt(beta(d.barred, g)) + " delta " +
                                fmt(delta(d.barred, g)) + ", change " + fmt(diff),
                            &d.barred, {}});
    }
    {
        double ddiv = evaluate(d.barred, Policy::subset(), ThresholdMode::ClosedForm).diversity -
                      evaluate(d.barred, Policy::full(), ThresholdMode::ClosedForm).diversity;
        bool pred = diversity_improves_on_drop_barriers(d.barred, opt.eta);
        d.checks.push_back({"barriers_diversity", agrees(pred, ddiv),
                            "predicate " + std::string(pred ? "true" : "false") + ", change " + fmt(ddiv), &d.barred, {}});
    }
    {
        // eta is the diversity level itself, with and without the test.
        auto c = info_constants(d.barred);
        double ef = eta(d.barred, d.barred.a.access, d.barred.b.access, c.rho_b_full, opt.eta);
        double es = eta(d.barred, 1.0, 1.0, c.rho_b_sub, opt.eta);
        double df = evaluate(d.barred, Policy::full(), ThresholdMode::ClosedForm).diversity;
        double ds = evaluate(d.barred, Policy::subset(), ThresholdMode::ClosedForm).diversity;
        double err = std::max(std::abs(ef - df), std::abs(es - ds));
        d.checks.push_back({"barriers_eta_level", err <= 1e-10, "max |eta - diversity| " + fmt(err), &d.barred, {}});
    }

    // AA: tau below pi and below the group-B applicant share of capacity.
    CounterRng rng(opt.seed, 4 * i + 2);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        d.aa = random_scenario(rng, barred_fam);
        double cap_b = d.aa.pi * d.aa.b.access / d.aa.capacity;
        double cap_a = (1.0 - d.aa.pi) * d.aa.a.access / d.aa.capacity;
        double hi = std::min({d.aa.pi, cap_b, 0.95}), lo = std::max(0.05, 1.0 - cap_a);
        if (!(hi > lo)) continue;
        d.tau = rng.uniform(lo, hi);
        Policy p = Policy::full();
        p.aa_target = d.tau;
        if (validate(d.aa, p).ok()) break;
    }
    for (Group g : {Group::A, Group::B}) {
        double gh = gamma_hat(d.aa, g, d.tau);
        double mf = aa_merit(d.aa, g, FeatureSet::full(), d.tau, gh);
        double ms = aa_merit(d.aa, g, FeatureSet::subset(), d.tau, gh);
        d.checks.push_back({"aa_gamma_hat", std::abs(mf - ms) <= 1e-8,
                            std::string("group ") + to_string(g) + " gamma_hat " + fmt(gh) + ", merit gap " +
                                fmt(mf - ms),
                            &d.aa, d.tau});
    }
}

}  // namespace

SuiteSummary run_theorem_suite(const SuiteOptions& opt) {
    std::vector<Draw> draws(opt.scenarios);
    std::vector<std::string> errors(opt.scenarios);
    parallel_for(opt.scenarios, resolve_threads(opt.threads), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            try {
                run_one(i, opt, draws[i]);
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
            }
        }
    });
    SuiteSummary s;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        if (!errors[i].empty()) {
            s.tally["evaluation"].checked++;
            s.tally["evaluation"].failed++;
            s.failures.push_back({"evaluation", i, draws[i].open, std::nullopt, errors[i]});
        }
        for (const auto& c : draws[i].checks) {
            auto& t = s.tally[c.property];
            ++t.checked;
            if (!c.pass) {
                ++t.failed;
                s.failures.push_back({c.property, i, *c.scenario, c.tau, c.detail});
            }
        }
    }
    return s;
}

}  // namespace admitlab
