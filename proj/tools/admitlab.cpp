// admitlab: evaluate admission policies, compare dropping the test, sweep parameters, check the
// theorem predicates, solve school markets and run the calibration experiment.
//
// Exit codes: 0 ok, 1 check failure, 2 input or validation error.

#include "admitlab/analysis.hpp"
#include "admitlab/calibrate.hpp"
#include "admitlab/errors.hpp"
#include "admitlab/json_io.hpp"
#include "admitlab/metrics.hpp"
#include "admitlab/montecarlo.hpp"
#include "admitlab/multischool.hpp"
#include "admitlab/theorem_suite.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

using namespace admitlab;

namespace {

constexpr int kOk = 0, kCheckFailed = 1, kInputError = 2;

struct Globals {
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

RunManifest manifest(const std::string& cmd, const Globals& g, std::uint64_t hash,
                     std::map<std::string, std::string> flags) {
    RunManifest m;
    m.command = cmd;
    m.scenario_hash = hash;
    m.seed = g.seed;
    m.flags = std::move(flags);
    m.version = tool_version();
    m.timestamp = current_timestamp();
    return m;
}

void emit(const Json& j) { std::cout << j.dump(2) << '\n'; }

std::string g17(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Policy make_policy(const std::string& which, std::optional<double> aa, bool unaware) {
    Policy p = which == "subset" ? Policy::subset() : Policy::full();
    if (which != "full" && which != "subset") throw InputError("--policy must be full or subset");
    p.aa_target = aa;
    if (unaware) p.estimation = Estimation::GroupUnaware;
    return p;
}

ThresholdMode make_mode(const std::string& m) {
    if (m == "exact") return ThresholdMode::ExactMixture;
    if (m == "closed") return ThresholdMode::ClosedForm;
    throw InputError("--mode must be exact or closed");
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(parse_json_file(path)); }

McConfig mc_config(const Globals& g, std::uint64_t n) {
    McConfig c;
    c.seed = g.seed;
    c.threads = g.threads;
    c.n_students = n;
    return c;
}

// ---- sweep ----

struct Axis {
    std::string key;
    double lo, hi;
    std::size_t steps;

    double at(std::size_t i) const { return steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1); }
};

Axis parse_axis(const std::string& spec) {
    static const std::regex re(R"(^([A-Za-z_0-9]+)=([^:]+):([^:]+):([0-9]+)$)");
    std::smatch m;
    if (!std::regex_match(spec, m, re)) throw InputError("--vary expects key=lo:hi:steps, got '" + spec + "'");
    Axis a;
    a.key = m[1];
    try {
        a.lo = std::stod(m[2]);
        a.hi = std::stod(m[3]);
    } catch (const std::exception&) {
        throw InputError("--vary bounds must be numbers in '" + spec + "'");
    }
    a.steps = std::stoul(m[4]);
    if (a.steps == 0) throw InputError("--vary needs at least one step");
    return a;
}

// Applies key=value; tau is routed to the AA target.
void apply_key(Scenario& s, std::optional<double>& tau, const std::string& key, double v) {
    static const std::regex feat(R"(^(var|bias)_(a|b)_([0-9]+|test)$)");
    std::smatch m;
    const std::size_t K = s.num_features();
    if (key == "prior_mean") s.prior_mean = v;
    else if (key == "prior_variance") s.prior_variance = v;
    else if (key == "pi") s.pi = v;
    else if (key == "capacity") s.capacity = v;
    else if (key == "tau") tau = v;
    else if (key == "gamma_a" || key == "access_a") s.a.access = v;
    else if (key == "gamma_b" || key == "access_b") s.b.access = v;
    else if (key == "var_test") s.a.features[K - 1].variance = s.b.features[K - 1].variance = v;
    else if (std::regex_match(key, m, feat)) {
        std::size_t k = m[3] == "test" ? K : std::stoul(m[3]);
        if (k < 1 || k > K) throw InputError("sweep key '" + key + "': feature index out of range");
        auto& f = (m[2] == "a" ? s.a : s.b).features[k - 1];
        (m[1] == "var" ? f.variance : f.bias) = v;
    } else {
        throw InputError("unknown sweep key '" + key +
                         "' (prior_mean, prior_variance, pi, capacity, tau, gamma_a, gamma_b, var_test, "
                         "var_<a|b>_<k|test>, bias_<a|b>_<k|test>)");
    }
}

std::string sweep_point(const Scenario& base, std::optional<double> base_tau, const std::vector<Axis>& axes,
                        const std::vector<std::size_t>& idx) {
    Scenario s = base;
    std::optional<double> tau = base_tau;
    std::string prefix;
    for (std::size_t a = 0; a < axes.size(); ++a) {
        double v = axes[a].at(idx[a]);
        apply_key(s, tau, axes[a].key, v);
        prefix += g17(v) + ',';
    }
    std::ostringstream out;
    auto row = [&](const char* metric, const char* group, const char* policy, const char* mode, double v) {
        out << prefix << metric << ',' << group << ',' << policy << ',' << mode << ',' << g17(v) << '\n';
    };
    const char* pol_names[2] = {"full", "subset"};
    const char* mode_names[2] = {"exact", "closed"};
    for (int mi = 0; mi < 2; ++mi) {
        ThresholdMode mode = mi == 0 ? ThresholdMode::ExactMixture : ThresholdMode::ClosedForm;
        PolicyOutcome o[2];
        bool ok = true;
        for (int pi = 0; pi < 2; ++pi) {
            Policy p = pi == 0 ? Policy::full() : Policy::subset();
            p.aa_target = tau;
            try {
                if (!validate(s, p).ok()) throw ModelError("invalid");
                o[pi] = evaluate(s, p, mode);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        for (int pi = 0; pi < 2; ++pi) {
            const double nan = NAN;
            const PolicyOutcome& x = o[pi];
            row("diversity", "all", pol_names[pi], mode_names[mi], ok ? x.diversity : nan);
            row("merit", "A", pol_names[pi], mode_names[mi], ok ? x.merit_a : nan);
            row("merit", "B", pol_names[pi], mode_names[mi], ok ? x.merit_b : nan);
            row("merit", "all", pol_names[pi], mode_names[mi], ok ? x.merit_overall : nan);
            row("threshold", "A", pol_names[pi], mode_names[mi], ok ? x.thresholds.for_group(Group::A) : nan);
            row("threshold", "B", pol_names[pi], mode_names[mi], ok ? x.thresholds.for_group(Group::B) : nan);
        }
        const double nan = NAN;
        row("diversity_difference", "all", "subset_minus_full", mode_names[mi],
            ok ? o[1].diversity - o[0].diversity : nan);
        row("merit_difference", "A", "subset_minus_full", mode_names[mi], ok ? o[1].merit_a - o[0].merit_a : nan);
        row("merit_difference", "B", "subset_minus_full", mode_names[mi], ok ? o[1].merit_b - o[0].merit_b : nan);
    }
    return out.str();
}

// ---- commands ----

int cmd_validate(const std::string& path, const std::string& policy, std::optional<double> aa, bool unaware) {
    Scenario s = load_scenario(path);
    auto rep = validate(s, make_policy(policy, aa, unaware));
    emit({{"valid", rep.ok()}, {"issues", rep.issues}, {"scenario_hash", [&] {
              char hex[17];
              std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(scenario_hash(s)));
              return std::string(hex);
          }()}});
    if (!rep.ok()) std::cerr << rep.joined() << '\n';
    return rep.ok() ? kOk : kInputError;
}

int cmd_eval(const Globals& g, const std::string& path, const std::string& policy, std::optional<double> aa,
             bool unaware, const std::string& mode_name, std::uint64_t mc) {
    Scenario s = load_scenario(path);
    Policy p = make_policy(policy, aa, unaware);
    ThresholdMode mode = make_mode(mode_name);
    require_valid(s, p);
    Json out;
    std::map<std::string, std::string> flags{{"policy", policy}, {"mode", mode_name},
                                             {"estimation", unaware ? "unaware" : "aware"}};
    if (aa) flags["aa"] = g17(*aa);
    if (unaware && mc == 0) mc = 1000000;
    if (mc) flags["mc"] = std::to_string(mc);
    out["manifest"] = to_json(manifest("eval", g, scenario_hash(s), flags));
    out["policy"] = to_json(p);
    out["outcome"] = unaware ? Json(nullptr) : to_json(evaluate(s, p, mode));
    out["monte_carlo"] = mc ? to_json(simulate(s, p, mc_config(g, mc))) : Json(nullptr);
    emit(out);
    return kOk;
}

int cmd_compare(const Globals& g, const std::string& path, std::optional<double> aa, std::uint64_t mc) {
    Scenario s = load_scenario(path);
    std::optional<McBudget> budget;
    if (mc) budget = McBudget{mc, g.seed, g.threads};
    auto rep = compare_policies(s, aa, budget);
    std::map<std::string, std::string> flags;
    if (aa) flags["aa"] = g17(*aa);
    if (mc) flags["mc"] = std::to_string(mc);
    emit({{"manifest", to_json(manifest("compare", g, scenario_hash(s), flags))}, {"report", to_json(rep)}});
    return kOk;
}

int cmd_sweep(const Globals& g, const std::string& path, const std::vector<std::string>& vary,
              std::optional<double> aa, const std::string& out_path) {
    Scenario s = load_scenario(path);
    if (vary.empty() || vary.size() > 2) throw InputError("--vary must be given once or twice");
    std::vector<Axis> axes;
    for (const auto& v : vary) axes.push_back(parse_axis(v));
    {
        // Reject unknown keys before doing any work.
        Scenario probe = s;
        std::optional<double> t = aa;
        for (const auto& a : axes) apply_key(probe, t, a.key, a.lo);
    }
    const std::size_t n0 = axes[0].steps, n1 = axes.size() > 1 ? axes[1].steps : 1;
    std::vector<std::string> chunks(n0 * n1);
    parallel_for(chunks.size(), resolve_threads(g.threads), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            std::vector<std::size_t> idx{i / n1};
            if (axes.size() > 1) idx.push_back(i % n1);
            chunks[i] = sweep_point(s, aa, axes, idx);
        }
    });
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw InputError("cannot write " + out_path);
    }
    std::ostream& os = out_path.empty() ? std::cout : file;
    for (const auto& a : axes) os << a.key << ',';
    os << "metric,group,policy,mode,value\n";
    for (const auto& c : chunks) os << c;
    if (!out_path.empty()) {
        std::map<std::string, std::string> flags{{"out", out_path}};
        for (std::size_t i = 0; i < vary.size(); ++i) flags["vary" + std::to_string(i + 1)] = vary[i];
        if (aa) flags["aa"] = g17(*aa);
        emit({{"manifest", to_json(manifest("sweep", g, scenario_hash(s), flags))},
              {"grid_points", chunks.size()}});
    }
    return kOk;
}

int cmd_check(const Globals& g, const std::string& suite, std::size_t n, bool eta_literal,
              std::optional<double> pi, const std::string& dump_dir) {
    if (suite != "theorems") throw InputError("--suite must be theorems");
    SuiteOptions opt;
    opt.scenarios = n;
    opt.seed = g.seed;
    opt.threads = g.threads;
    opt.eta = eta_literal ? EtaPrefactor::Literal : EtaPrefactor::Definitional;
    opt.fixed_pi = pi;
    auto sum = run_theorem_suite(opt);

    Json props = Json::object();
    for (const auto& [k, t] : sum.tally) props[k] = {{"checked", t.checked}, {"failed", t.failed}};
    Json fails = Json::array();
    if (!sum.ok()) std::filesystem::create_directories(dump_dir);
    for (const auto& f : sum.failures) {
        std::string file = dump_dir + "/" + f.property + "_" + std::to_string(f.index) + ".json";
        Json dump = to_json(f.scenario);
        dump["aa_target"] = f.tau ? Json(*f.tau) : Json(nullptr);
        dump["property"] = f.property;
        dump["detail"] = f.detail;
        std::ofstream(file) << dump.dump(2) << '\n';
        fails.push_back({{"property", f.property}, {"index", f.index}, {"detail", f.detail}, {"file", file}});
        std::cerr << "FAIL " << f.property << " #" << f.index << ": " << f.detail << '\n';
    }
    std::map<std::string, std::string> flags{{"suite", suite}, {"scenarios", std::to_string(n)},
                                             {"eta", eta_literal ? "literal" : "definitional"}};
    if (pi) flags["pi"] = g17(*pi);
    emit({{"manifest", to_json(manifest("check", g, 0, flags))},
          {"passed", sum.ok()},
          {"properties", props},
          {"failures", fails}});
    return sum.ok() ? kOk : kCheckFailed;
}

int cmd_market(const Globals& g, const std::string& path, int deviate, std::uint64_t mc) {
    Market m = market_from_json(parse_json_file(path));
    std::map<std::string, std::string> flags;
    Json out;
    if (deviate) {
        if (deviate != 1) throw InputError("--deviate supports school 1 only");
        flags["deviate"] = "1";
        flags["mc"] = std::to_string(mc);
        out["manifest"] = to_json(manifest("market", g, scenario_hash(m.scenario), flags));
        out["deviation"] = to_json(two_school_deviation(m, mc_config(g, mc)));
    } else {
        out["manifest"] = to_json(manifest("market", g, scenario_hash(m.scenario), flags));
        out["market"] = to_json(solve_market(m));
    }
    emit(out);
    return kOk;
}

int cmd_calibrate(const Globals& g, const std::string& data, const std::vector<std::string>& mappings,
                  double capacity, double gamma_b, const std::string& csv_path) {
    std::vector<ExperimentResult> rows;
    Json results = Json::array();
    for (const auto& mp : mappings) {
        ColumnMapping m = mapping_from_json(parse_json_file(mp));
        Dataset d = load_csv(data, m);
        for (const auto& msg : d.drop_report) std::cerr << data << ": " << msg << '\n';
        auto r = run_experiment(d, capacity, gamma_b, g.seed);
        r.label = m.label.empty() ? mp : m.label;
        Json j = to_json(r);
        j["rows_used"] = d.size();
        j["rows_dropped"] = d.dropped;
        results.push_back(j);
        rows.push_back(r);
    }
    if (!csv_path.empty()) {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw InputError("cannot write " + csv_path);
        write_table_csv(f, rows);
    }
    std::map<std::string, std::string> flags{{"capacity", g17(capacity)}, {"gamma_b", g17(gamma_b)}};
    if (!csv_path.empty()) flags["csv"] = csv_path;
    emit({{"manifest", to_json(manifest("calibrate", g, 0, flags))}, {"results", results}});
    return kOk;
}

int cmd_generate(const Globals& g, const std::string& kind, const std::string& scenario, std::size_t rows,
                 const std::string& out_path) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw InputError("cannot write " + out_path);
    if (kind == "synthetic") {
        write_synthetic_csv(f, rows, g.seed);
    } else if (kind == "model") {
        if (scenario.empty()) throw InputError("generate model needs --scenario");
        write_model_csv(f, load_scenario(scenario), rows, g.seed);
    } else {
        throw InputError("generate kind must be synthetic or model");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capacity-constrained admissions with noisy features and unequal test access"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0: ADMITLAB_THREADS or hardware)");

    std::string scenario, policy = "full", mode = "exact", out, suite = "theorems", dump_dir = "check_failures";
    std::string data, csv, kind, gen_scenario;
    std::optional<double> aa, pi;
    bool unaware = false, eta_literal = false;
    std::uint64_t mc = 0, dev_mc = 1000000;
    std::size_t n_scen = 1000, rows = 20000;
    std::vector<std::string> vary, mappings;
    int deviate = 0;
    double capacity = 0.2, gamma_b = 2.0 / 3.0;

    auto* v = app.add_subcommand("validate", "Check a scenario against the model preconditions");
    v->add_option("scenario", scenario)->required();
    v->add_option("--policy", policy);
    v->add_option("--aa", aa);
    v->add_flag("--unaware", unaware);

    auto* e = app.add_subcommand("eval", "Evaluate one policy");
    e->add_option("scenario", scenario)->required();
    e->add_option("--policy", policy, "full or subset");
    e->add_option("--aa", aa, "Affirmative-action target diversity");
    e->add_flag("--unaware", unaware, "Group-unaware estimation (Monte Carlo)");
    e->add_option("--mode", mode, "Threshold mode: exact or closed");
    e->add_option("--mc", mc, "Also simulate with this many students");

    auto* c = app.add_subcommand("compare", "Compare keeping and dropping the test");
    c->add_option("scenario", scenario)->required();
    c->add_option("--aa", aa);
    c->add_option("--mc", mc);

    auto* s = app.add_subcommand("sweep", "Long-format CSV over a 1-D or 2-D parameter grid");
    s->add_option("scenario", scenario)->required();
    s->add_option("--vary", vary, "key=lo:hi:steps (repeat for a 2-D grid)")->required();
    s->add_option("--aa", aa);
    s->add_option("--out", out, "Output CSV (standard output if omitted)");

    auto* k = app.add_subcommand("check", "Theorem predicate suite on random scenarios");
    k->add_option("--suite", suite);
    k->add_option("--scenarios", n_scen)->capture_default_str();
    k->add_flag("--eta-literal", eta_literal, "Use the (1 - pi) eta prefactor");
    k->add_option("--pi", pi, "Fix the group-B share");
    k->add_option("--dump-dir", dump_dir, "Directory for failing scenarios");

    auto* m = app.add_subcommand("market", "Equilibrium cutoffs and per-school outcomes");
    m->add_option("market", scenario)->required();
    m->add_option("--deviate", deviate, "School that drops the test (1)");
    m->add_option("--mc", dev_mc, "Students simulated for --deviate")->capture_default_str();

    auto* cal = app.add_subcommand("calibrate", "With/without-test experiment on applicant CSV");
    cal->add_option("data", data)->required();
    cal->add_option("mapping", mappings)->required();
    cal->add_option("--capacity", capacity)->capture_default_str();
    cal->add_option("--gamma-b", gamma_b)->capture_default_str();
    cal->add_option("--csv", csv, "Write the table CSV here");

    auto* gen = app.add_subcommand("generate", "Write a synthetic applicant CSV");
    gen->add_option("kind", kind, "synthetic or model")->required();
    gen->add_option("--scenario", gen_scenario);
    gen->add_option("--rows", rows)->capture_default_str();
    gen->add_option("--out", out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kInputError;
    }

    try {
        if (*v) return cmd_validate(scenario, policy, aa, unaware);
        if (*e) return cmd_eval(g, scenario, policy, aa, unaware, mode, mc);
        if (*c) return cmd_compare(g, scenario, aa, mc);
        if (*s) return cmd_sweep(g, scenario, vary, aa, out);
        if (*k) return cmd_check(g, suite, n_scen, eta_literal, pi, dump_dir);
        if (*m) return cmd_market(g, scenario, deviate, dev_mc);
        if (*cal) return cmd_calibrate(g, data, mappings, capacity, gamma_b, csv);
        if (*gen) return cmd_generate(g, kind, gen_scenario, rows, out);
    } catch (const InputError& ex) {
        std::cerr << "input error: " << ex.what() << '\n';
        return kInputError;
    } catch (const ModelError& ex) {
        std::cerr << "invalid model: " << ex.what() << '\n';
        return kInputError;
    } catch (const DomainError& ex) {
        std::cerr << "domain error: " << ex.what() << '\n';
        return kInputError;
    } catch (const BracketError& ex) {
        std::cerr << "root finding failed: " << ex.what() << '\n';
        return kInputError;
    }
    return kInputError;
}
