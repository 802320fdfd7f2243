#pragma once

#include <string>

#include <json.hpp>

#include "capillary/experiment.hpp"

namespace capillary {

inline constexpr const char* kReportSchemaVersion = "capillary.run_report/1";

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);

/// A spec file holds one experiment object or {"experiments": [...]}.
std::vector<ExperimentSpec> load_specs(const std::string& path);

nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const SphereFit& s);
nlohmann::json to_json(const RunReport& r);
nlohmann::json to_json(const LadderTable& t);

void write_json(const std::string& path, const nlohmann::json& j);
void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows);
void write_ladder_csv(const std::string& path, const LadderTable& t);

}  // namespace capillary
