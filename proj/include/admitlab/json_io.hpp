#pragma once

#include "admitlab/analysis.hpp"
#include "admitlab/calibrate.hpp"
#include "admitlab/metrics.hpp"
#include "admitlab/model.hpp"
#include "admitlab/montecarlo.hpp"
#include "admitlab/multischool.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>

namespace admitlab {

using Json = nlohmann::json;

// Parse errors and schema violations throw InputError naming the offending key.
Json parse_json_file(const std::string& path);

// Scenario schema:
// {"prior": {"mean", "variance"}, "pi", "capacity",
//  "groups": {"A": {"access", "features": [{"bias", "variance"}, ...]}, "B": {...}}}
Scenario scenario_from_json(const Json& j);
Json to_json(const Scenario& s);

// Policy schema: {"features": "full" | "subset" | [1-based indices], "aa_target": number | null,
//                 "estimation": "aware" | "unaware"}
Policy policy_from_json(const Json& j);
Json to_json(const Policy& p);

// Market schema: scenario keys plus "schools": [{"capacity", "policy"?}, ...] in preference
// order. The scenario capacity defaults to the total school capacity.
Market market_from_json(const Json& j);

// Mapping schema: {"label"?, "skill_column", "group_column", "group_b_values": [...],
//                  "feature_columns": [...], "test_column", "categorical_columns"?: [...]}
ColumnMapping mapping_from_json(const Json& j);
Json to_json(const ColumnMapping& m);

Json to_json(const Thresholds& t);
Json to_json(const PolicyOutcome& o);
Json to_json(const McOutcome& o);
Json to_json(const InfoConstants& c);
Json to_json(const TheoremReport& r);
TheoremReport theorem_report_from_json(const Json& j);
Json to_json(const MarketOutcome& o);
Json to_json(const DeviationReport& r);
Json to_json(const ExperimentResult& r);

// 64-bit FNV-1a over the canonical (sorted-key, compact) scenario JSON.
std::uint64_t scenario_hash(const Scenario& s);

struct RunManifest {
    std::string command;
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> flags;
    std::string version;
    // SOURCE_DATE_EPOCH when set (reproducible output), otherwise wall-clock time.
    std::string timestamp;
};

std::string tool_version();
std::string current_timestamp();
Json to_json(const RunManifest& m);

}  // namespace admitlab
