#include "admitlab/json_io.hpp"

#include "admitlab/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>

namespace admitlab {

namespace {

const Json& at(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw InputError(where + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw InputError(where + ": missing key '" + key + "'");
    return *it;
}

double number(const Json& j, const char* key, const std::string& where) {
    const Json& v = at(j, key, where);
    if (!v.is_number()) throw InputError(where + "." + key + ": expected a number");
    return v.get<double>();
}

std::string text(const Json& j, const char* key, const std::string& where) {
    const Json& v = at(j, key, where);
    if (!v.is_string()) throw InputError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::vector<std::string> strings(const Json& j, const char* key, const std::string& where) {
    const Json& v = at(j, key, where);
    if (!v.is_array()) throw InputError(where + "." + key + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw InputError(where + "." + key + ": expected an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

// Non-finite values serialize as null.
Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json opt(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

Json opt_pair(const std::optional<std::pair<double, double>>& p) {
    return p ? Json::array({num(p->first), num(p->second)}) : Json(nullptr);
}

double get_num(const Json& j) { return j.is_null() ? NAN : j.get<double>(); }

std::optional<double> get_opt(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

std::optional<std::pair<double, double>> get_opt_pair(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return std::pair{get_num(j.at(0)), get_num(j.at(1))};
}

GroupParams group_from_json(const Json& j, const std::string& where) {
    GroupParams g;
    g.access = j.contains("access") ? number(j, "access", where) : 1.0;
    const Json& fs = at(j, "features", where);
    if (!fs.is_array()) throw InputError(where + ".features: expected an array");
    for (std::size_t k = 0; k < fs.size(); ++k) {
        std::string w = where + ".features[" + std::to_string(k) + "]";
        FeatureNoise f;
        f.bias = fs[k].contains("bias") ? number(fs[k], "bias", w) : 0.0;
        f.variance = number(fs[k], "variance", w);
        g.features.push_back(f);
    }
    return g;
}

Json to_json(const GroupParams& g) {
    Json fs = Json::array();
    for (const auto& f : g.features) fs.push_back({{"bias", f.bias}, {"variance", f.variance}});
    return {{"access", g.access}, {"features", fs}};
}

Json to_json(const McEstimate& e) { return {{"value", num(e.value)}, {"se", num(e.se)}}; }

PolicyOutcome outcome_from_json(const Json& j) {
    PolicyOutcome o;
    o.thresholds.common = get_opt(j.at("thresholds").at("common"));
    o.thresholds.per_group = get_opt_pair(j.at("thresholds").at("per_group"));
    o.merit_overall = get_num(j.at("merit_overall"));
    o.merit_a = get_num(j.at("merit_a"));
    o.merit_b = get_num(j.at("merit_b"));
    o.diversity = get_num(j.at("diversity"));
    o.admitted_mass = get_num(j.at("admitted_mass"));
    return o;
}

}  // namespace

Json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

Scenario scenario_from_json(const Json& j) {
    const std::string w = "scenario";
    Scenario s;
    const Json& prior = at(j, "prior", w);
    s.prior_mean = number(prior, "mean", w + ".prior");
    s.prior_variance = number(prior, "variance", w + ".prior");
    s.pi = number(j, "pi", w);
    s.capacity = number(j, "capacity", w);
    const Json& groups = at(j, "groups", w);
    s.a = group_from_json(at(groups, "A", w + ".groups"), w + ".groups.A");
    s.b = group_from_json(at(groups, "B", w + ".groups"), w + ".groups.B");
    if (s.a.features.size() != s.b.features.size())
        throw InputError("scenario.groups: both groups need the same number of features");
    return s;
}

Json to_json(const Scenario& s) {
    return {{"prior", {{"mean", s.prior_mean}, {"variance", s.prior_variance}}},
            {"pi", s.pi},
            {"capacity", s.capacity},
            {"groups", {{"A", to_json(s.a)}, {"B", to_json(s.b)}}}};
}

Policy policy_from_json(const Json& j) {
    const std::string w = "policy";
    if (!j.is_object()) throw InputError("policy: expected an object");
    Policy p;
    if (j.contains("features")) {
        const Json& f = j["features"];
        if (f.is_string()) {
            auto v = f.get<std::string>();
            if (v == "full") p.features = FeatureSet::full();
            else if (v == "subset") p.features = FeatureSet::subset();
            else throw InputError("policy.features: expected \"full\", \"subset\" or an index array");
        } else if (f.is_array()) {
            std::vector<int> idx;
            for (const auto& e : f) {
                if (!e.is_number_integer()) throw InputError("policy.features: indices must be integers");
                idx.push_back(e.get<int>());
            }
            p.features = FeatureSet::explicit_set(idx);
        } else {
            throw InputError("policy.features: expected \"full\", \"subset\" or an index array");
        }
    }
    if (j.contains("aa_target") && !j["aa_target"].is_null()) p.aa_target = number(j, "aa_target", w);
    if (j.contains("estimation")) {
        auto e = text(j, "estimation", w);
        if (e == "aware") p.estimation = Estimation::GroupAware;
        else if (e == "unaware") p.estimation = Estimation::GroupUnaware;
        else throw InputError("policy.estimation: expected \"aware\" or \"unaware\"");
    }
    return p;
}

Json to_json(const Policy& p) {
    Json f;
    switch (p.features.kind()) {
    case FeatureSet::Kind::Full: f = "full"; break;
    case FeatureSet::Kind::Subset: f = "subset"; break;
    case FeatureSet::Kind::Explicit: f = p.features.explicit_indices(); break;
    }
    return {{"features", f},
            {"aa_target", opt(p.aa_target)},
            {"estimation", p.estimation == Estimation::GroupAware ? "aware" : "unaware"}};
}

Market market_from_json(const Json& j) {
    Market m;
    const Json& schools = at(j, "schools", "market");
    if (!schools.is_array() || schools.empty()) throw InputError("market.schools: expected a non-empty array");
    Json sj = j;
    double total = 0.0;
    bool any_policy = false;
    for (std::size_t k = 0; k < schools.size(); ++k) {
        std::string w = "market.schools[" + std::to_string(k) + "]";
        double c = number(schools[k], "capacity", w);
        m.capacities.push_back(c);
        total += c;
        any_policy = any_policy || schools[k].contains("policy");
    }
    if (any_policy)
        for (const auto& s : schools)
            m.policies.push_back(s.contains("policy") ? policy_from_json(s["policy"]) : Policy::full());
    if (!sj.contains("capacity")) sj["capacity"] = total;
    m.scenario = scenario_from_json(sj);
    return m;
}

ColumnMapping mapping_from_json(const Json& j) {
    const std::string w = "mapping";
    ColumnMapping m;
    if (j.contains("label")) m.label = text(j, "label", w);
    m.skill_column = text(j, "skill_column", w);
    m.group_column = text(j, "group_column", w);
    m.group_b_values = strings(j, "group_b_values", w);
    m.feature_columns = strings(j, "feature_columns", w);
    m.test_column = text(j, "test_column", w);
    if (j.contains("categorical_columns")) m.categorical_columns = strings(j, "categorical_columns", w);
    m.check();
    return m;
}

Json to_json(const ColumnMapping& m) {
    return {{"label", m.label},
            {"skill_column", m.skill_column},
            {"group_column", m.group_column},
            {"group_b_values", m.group_b_values},
            {"feature_columns", m.feature_columns},
            {"test_column", m.test_column},
            {"categorical_columns", m.categorical_columns}};
}

Json to_json(const Thresholds& t) { return {{"common", opt(t.common)}, {"per_group", opt_pair(t.per_group)}}; }

Json to_json(const PolicyOutcome& o) {
    return {{"thresholds", to_json(o.thresholds)},
            {"merit_overall", num(o.merit_overall)},
            {"merit_a", num(o.merit_a)},
            {"merit_b", num(o.merit_b)},
            {"diversity", num(o.diversity)},
            {"admitted_mass", num(o.admitted_mass)}};
}

Json to_json(const McOutcome& o) {
    return {{"diversity", to_json(o.diversity)},
            {"merit_a", to_json(o.merit_a)},
            {"merit_b", to_json(o.merit_b)},
            {"merit_overall", to_json(o.merit_overall)},
            {"threshold_hat", opt(o.threshold_hat)},
            {"threshold_hat_per_group", opt_pair(o.threshold_hat_per_group)},
            {"n_students", o.n_students},
            {"n_applicants", o.n_applicants},
            {"n_admitted", o.n_admitted},
            {"n_admitted_b", o.n_admitted_b},
            {"target_count", o.target_count}};
}

Json to_json(const InfoConstants& c) {
    return {{"v_a_full", num(c.v_a_full)},     {"v_b_full", num(c.v_b_full)},
            {"v_a_subset", num(c.v_a_sub)},    {"v_b_subset", num(c.v_b_sub)},
            {"rho_a_full", num(c.rho_a_full)}, {"rho_b_full", num(c.rho_b_full)},
            {"rho_a_subset", num(c.rho_a_sub)}, {"rho_b_subset", num(c.rho_b_sub)},
            {"xi_a", num(c.xi_a)},             {"xi_b", num(c.xi_b)}};
}

Json to_json(const TheoremReport& r) {
    Json verdicts = Json::object();
    for (const auto& [k, v] : r.verdicts) {
        verdicts[k] = {{"closed_form", v.closed_form},
                       {"monte_carlo", v.monte_carlo ? Json(*v.monte_carlo) : Json(nullptr)}};
    }
    Json agree = Json::object();
    for (const auto& [k, v] : r.mc_agreement) agree[k] = v;
    auto pair = [](const MetricsPair& m) { return Json{{"full", to_json(m.full)}, {"subset", to_json(m.subset)}}; };
    return {{"barriers", r.barriers},
            {"aa_target", opt(r.aa_target)},
            {"constants", to_json(r.constants)},
            {"metrics", {{"exact", pair(r.exact)}, {"closed", pair(r.closed)}}},
            {"beta", {{"A", num(r.beta_a)}, {"B", num(r.beta_b)}}},
            {"delta", {{"A", num(r.delta_a)}, {"B", num(r.delta_b)}}},
            {"eta", {{"with_test", num(r.eta_with_test)}, {"without_test", num(r.eta_without_test)}}},
            {"gamma_hat", {{"A", opt(r.gamma_hat_a)}, {"B", opt(r.gamma_hat_b)}}},
            {"q_e", opt(r.q_e)},
            {"q_crossing", {{"A", opt(r.q_crossing_a)}, {"B", opt(r.q_crossing_b)}}},
            {"if_crossing", opt(r.if_crossing)},
            {"diversity_condition_holds", r.diversity_condition_holds},
            {"diversity_verdict", r.diversity_verdict},
            {"merit_verdict", r.merit_verdict},
            {"verdicts", verdicts},
            {"mc_agreement", agree}};
}

TheoremReport theorem_report_from_json(const Json& j) {
    try {
        TheoremReport r;
        r.barriers = j.at("barriers").get<bool>();
        r.aa_target = get_opt(j.at("aa_target"));
        const Json& c = j.at("constants");
        r.constants.v_a_full = get_num(c.at("v_a_full"));
        r.constants.v_b_full = get_num(c.at("v_b_full"));
        r.constants.v_a_sub = get_num(c.at("v_a_subset"));
        r.constants.v_b_sub = get_num(c.at("v_b_subset"));
        r.constants.rho_a_full = get_num(c.at("rho_a_full"));
        r.constants.rho_b_full = get_num(c.at("rho_b_full"));
        r.constants.rho_a_sub = get_num(c.at("rho_a_subset"));
        r.constants.rho_b_sub = get_num(c.at("rho_b_subset"));
        r.constants.xi_a = get_num(c.at("xi_a"));
        r.constants.xi_b = get_num(c.at("xi_b"));
        const Json& m = j.at("metrics");
        r.exact = {outcome_from_json(m.at("exact").at("full")), outcome_from_json(m.at("exact").at("subset"))};
        r.closed = {outcome_from_json(m.at("closed").at("full")), outcome_from_json(m.at("closed").at("subset"))};
        r.beta_a = get_num(j.at("beta").at("A"));
        r.beta_b = get_num(j.at("beta").at("B"));
        r.delta_a = get_num(j.at("delta").at("A"));
        r.delta_b = get_num(j.at("delta").at("B"));
        r.eta_with_test = get_num(j.at("eta").at("with_test"));
        r.eta_without_test = get_num(j.at("eta").at("without_test"));
        r.gamma_hat_a = get_opt(j.at("gamma_hat").at("A"));
        r.gamma_hat_b = get_opt(j.at("gamma_hat").at("B"));
        r.q_e = get_opt(j.at("q_e"));
        r.q_crossing_a = get_opt(j.at("q_crossing").at("A"));
        r.q_crossing_b = get_opt(j.at("q_crossing").at("B"));
        r.if_crossing = get_opt(j.at("if_crossing"));
        r.diversity_condition_holds = j.at("diversity_condition_holds").get<bool>();
        r.diversity_verdict = j.at("diversity_verdict").get<std::string>();
        r.merit_verdict = j.at("merit_verdict").get<std::string>();
        for (const auto& [k, v] : j.at("verdicts").items()) {
            Verdict vd;
            vd.closed_form = v.at("closed_form").get<bool>();
            if (!v.at("monte_carlo").is_null()) vd.monte_carlo = v.at("monte_carlo").get<bool>();
            r.verdicts[k] = vd;
        }
        for (const auto& [k, v] : j.at("mc_agreement").items()) r.mc_agreement[k] = v.get<bool>();
        return r;
    } catch (const Json::exception& e) {
        throw InputError(std::string("theorem report: ") + e.what());
    }
}

Json to_json(const MarketOutcome& o) {
    Json schools = Json::array();
    for (std::size_t j = 0; j < o.schools.size(); ++j) {
        const auto& s = o.schools[j];
        schools.push_back({{"school", j + 1},
                           {"cutoff", num(s.cutoff)},
                           {"band_mass", num(s.band_mass)},
                           {"mass_a", num(s.mass_a)},
                           {"mass_b", num(s.mass_b)},
                           {"diversity", num(s.diversity)},
                           {"merit_a", num(s.merit_a)},
                           {"merit_b", num(s.merit_b)},
                           {"tier", to_string(s.tier)}});
    }
    return {{"cutoffs", o.cutoffs},
            {"schools", schools},
            {"crossing_points", opt_pair(o.crossing)},
            {"tier_cutoffs", opt_pair(o.tier_cutoffs)}};
}

Json to_json(const DeviationReport& r) {
    auto cell = [](const DeviationCell& c) {
        return Json{{"base", num(c.base)}, {"deviated", num(c.deviated)}, {"delta", num(c.delta())},
                    {"delta_se", num(c.delta_se)}};
    };
    Json schools = Json::array();
    for (int j = 0; j < 2; ++j) {
        schools.push_back({{"school", j + 1},
                           {"seats", r.seats[j]},
                           {"merit_a", cell(r.merit[j][0])},
                           {"merit_b", cell(r.merit[j][1])},
                           {"diversity", cell(r.diversity[j])}});
    }
    return {{"n_students", r.n_students}, {"schools", schools}};
}

Json to_json(const ExperimentResult& r) {
    auto cfg = [](const ConfigResult& c) {
        return Json{{"merit", num(c.merit)},        {"diversity", num(c.diversity)},
                    {"applicants", c.applicants},   {"admitted", c.admitted},
                    {"admitted_b", c.admitted_b}};
    };
    return {{"label", r.label},
            {"capacity", r.capacity},
            {"gamma_b", r.access_rate_b},
            {"seed", r.seed},
            {"with_test", cfg(r.with_test)},
            {"without_test", cfg(r.without_test)}};
}

std::uint64_t scenario_hash(const Scenario& s) {
    std::string text = to_json(s).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string tool_version() { return "1.0.0"; }

std::string current_timestamp() {
    std::time_t t;
    if (const char* e = std::getenv("SOURCE_DATE_EPOCH"); e && *e) {
        char* end = nullptr;
        long long v = std::strtoll(e, &end, 10);
        if (*end != '\0') throw InputError("SOURCE_DATE_EPOCH must be an integer");
        t = static_cast<std::time_t>(v);
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json to_json(const RunManifest& m) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(m.scenario_hash));
    return {{"command", m.command},
            {"scenario_hash", hex},
            {"seed", m.seed},
            {"flags", m.flags},
            {"version", m.version},
            {"timestamp", m.timestamp}};
}

}  // namespace admitlab
