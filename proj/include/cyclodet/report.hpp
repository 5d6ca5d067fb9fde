#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cyclodet/run_length.hpp"
#include "cyclodet/scenario.hpp"

namespace cyclodet {

enum class ReportFormat { Json, Csv };

nlohmann::json to_json(const ScenarioOutput& output);
nlohmann::json to_json(const EfficiencyReport& report);

ScenarioOutput scenario_from_json(const nlohmann::json& j);
EfficiencyReport efficiency_from_json(const nlohmann::json& j);

/// Json: writes one document at `dest` (a file path). Csv: writes per-modality
/// `trajectory_<label>.csv` plus `alarms.csv` (scenarios) or `efficiency.csv`
/// (budget sweeps) under `dest` (a directory, created if missing). Returns the
/// paths written. Doubles render at 15 significant digits in CSV and with
/// shortest round-trip notation in JSON, so identical inputs give identical
/// bytes.
std::vector<std::string> emit_report(const ScenarioOutput& output, ReportFormat format,
                                     const std::string& dest);
std::vector<std::string> emit_report(const EfficiencyReport& report, ReportFormat format,
                                     const std::string& dest);

}  // namespace cyclodet
