#include "datapolicy/report_io.hpp"

#include "datapolicy/dataset_io.hpp"

namespace datapolicy {

using nlohmann::json;

namespace {

Termination termination_from_string(const std::string& s, const std::string& source) {
  for (Termination t : {Termination::ReachedOrigin, Termination::ReachedTerminalSet, Termination::MaxSteps,
                        Termination::Infeasible}) {
    if (s == to_string(t)) return t;
  }
  throw ParseError(source + ": terminated: unknown value \"" + s + "\"");
}

Vector to_vector(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

json report_to_json(const SimulationReport& report) {
  json doc;
  doc["format"] = kReportFormat;
  doc["terminated"] = to_string(report.terminated);
  doc["all_monitors_passed"] = report.all_monitors_passed;
  doc["certified"] = report.certified;
  doc["realized_cost"] = report.realized_cost;
  doc["initial_q"] = report.initial_q;
  doc["fallback_count"] = report.fallback_count;
  doc["failures"] = report.failures;
  doc["warnings"] = report.warnings;
  json steps = json::array();
  for (const auto& s : report.steps) {
    const StepMonitors& m = s.monitors;
    steps.push_back({{"state", vector_to_json(s.state)},
                     {"input", vector_to_json(s.input)},
                     {"q_value", s.q_value},
                     {"stage_cost", s.stage_cost},
                     {"monitors",
                      {{"containment", m.containment},
                       {"input_box", m.input_box},
                       {"state_box", m.state_box},
                       {"lyapunov_decrease", m.lyapunov_decrease},
                       {"candidate_shift", m.candidate_shift},
                       {"local_fallback_used", m.local_fallback_used},
                       {"lyapunov_slack", m.lyapunov_slack}}}});
  }
  doc["steps"] = std::move(steps);
  return doc;
}

SimulationReport report_from_json(const json& doc, const std::string& source) {
  if (!doc.is_object() || !doc.contains("format") || !doc["format"].is_string()) {
    throw ParseError(source + ": format: missing");
  }
  const std::string format = doc["format"].get<std::string>();
  if (format != kReportFormat) {
    throw VersionError(source + ": report format \"" + format + "\" is not supported (expected \"" +
                       kReportFormat + "\")");
  }
  try {
    SimulationReport r;
    r.terminated = termination_from_string(doc.at("terminated").get<std::string>(), source);
    r.all_monitors_passed = doc.at("all_monitors_passed").get<bool>();
    r.certified = doc.at("certified").get<bool>();
    r.realized_cost = doc.at("realized_cost").get<double>();
    r.initial_q = doc.at("initial_q").get<double>();
    r.fallback_count = doc.at("fallback_count").get<std::size_t>();
    r.failures = doc.at("failures").get<std::vector<std::string>>();
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    for (const auto& js : doc.at("steps")) {
      StepRecord s;
      s.state = to_vector(js.at("state"));
      s.input = to_vector(js.at("input"));
      s.q_value = js.at("q_value").get<double>();
      s.stage_cost = js.at("stage_cost").get<double>();
      const json& m = js.at("monitors");
      s.monitors.containment = m.at("containment").get<bool>();
      s.monitors.input_box = m.at("input_box").get<bool>();
      s.monitors.state_box = m.at("state_box").get<bool>();
      s.monitors.lyapunov_decrease = m.at("lyapunov_decrease").get<bool>();
      s.monitors.candidate_shift = m.at("candidate_shift").get<bool>();
      s.monitors.local_fallback_used = m.at("local_fallback_used").get<bool>();
      s.monitors.lyapunov_slack = m.at("lyapunov_slack").get<double>();
      r.steps.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
}

void save_report(const SimulationReport& report, const std::filesystem::path& path) {
  write_json_file(report_to_json(report), path);
}

SimulationReport load_report(const std::filesystem::path& path) {
  return report_from_json(read_json_file(path), path.string());
}

}  // namespace datapolicy
