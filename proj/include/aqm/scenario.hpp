#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "aqm/parallel.hpp"

namespace aqm::cli {

using nlohmann::json;

struct SweepAxis {
    std::string path;  // dotted parameter path into the experiment defaults
    std::vector<json> values;
};

struct Scenario {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string output;  // CSV filename; empty: <experiment>.csv
    std::vector<SweepAxis> sweep;
    json params;  // overrides merged onto the experiment defaults
};

// Throws std::runtime_error naming the offending field.
Scenario parse_scenario(const json& doc);

// Schema and physics-range diagnostics; empty means valid. Never throws on
// content problems (only on unreadable input).
std::vector<std::string> validate_scenario(const json& doc);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RowError {
    std::size_t index;
    std::string message;
};

struct RunResult {
    Table table;
    json metadata;  // config hash, resolved params, extras
    std::vector<RowError> errors;
};

struct ExperimentInfo {
    std::string name;
    std::string description;
};

std::vector<ExperimentInfo> list_experiments();

// Execute over the sweep grid (scenario sweep or the experiment default).
RunResult run_scenario(const Scenario& scenario, ExecMode mode = ExecMode::Parallel,
                       int workers = 0);

// Shortest-round-trip CSV; header row then data rows.
std::string to_csv(const Table& table);

// dotted-path access helpers shared by the sweep/override machinery
const json* json_find(const json& doc, const std::string& dotted);
void json_set(json& doc, const std::string& dotted, const json& value);

std::uint64_t config_hash(const json& canonical);

}  // namespace aqm::cli
