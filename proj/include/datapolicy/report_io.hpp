#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "datapolicy/policy.hpp"

namespace datapolicy {

inline constexpr const char* kReportFormat = "rep-v1";

nlohmann::json report_to_json(const SimulationReport& report);
SimulationReport report_from_json(const nlohmann::json& doc, const std::string& source = "report");

void save_report(const SimulationReport& report, const std::filesystem::path& path);
SimulationReport load_report(const std::filesystem::path& path);

}  // namespace datapolicy
