#include "rlab/report.hpp"

#include <algorithm>

namespace rlab {

using json = nlohmann::json;

std::string tool_version() { return RLAB_VERSION; }

ReportEnvelope::ReportEnvelope(std::string command, json config)
    : command_(std::move(command)), config_(std::move(config)) {}

void ReportEnvelope::add(std::string kind, std::string name, bool pass, json data) {
  records_.push_back(Record{std::move(kind), std::move(name), pass, std::move(data)});
}

bool ReportEnvelope::pass() const {
  return !records_.empty() &&
         std::all_of(records_.begin(), records_.end(), [](const Record& r) { return r.pass; });
}

json ReportEnvelope::to_json(std::optional<double> wall_clock_s) const {
  json recs = json::array();
  for (const Record& r : records_) {
    json j = r.data.is_object() ? r.data : json{{"value", r.data}};
    j["kind"] = r.kind;
    j["name"] = r.name;
    j["pass"] = r.pass;
    recs.push_back(std::move(j));
  }
  json out = {{"schema", kReportSchema},
              {"tool", "ricci_lab"},
              {"version", tool_version()},
              {"command", command_},
              {"config", config_},
              {"records", std::move(recs)},
              {"pass", pass()}};
  if (wall_clock_s) out["wall_clock_s"] = *wall_clock_s;
  return out;
}

std::optional<std::string> validate_report(const json& j) {
  if (!j.is_object()) return "report is not a JSON object";
  if (!j.contains("schema") || j["schema"] != kReportSchema) {
    return "unsupported schema (expected " + std::to_string(kReportSchema) + ")";
  }
  for (const char* key : {"command", "records", "pass"}) {
    if (!j.contains(key)) return std::string("missing key '") + key + "'";
  }
  if (!j["records"].is_array()) return "'records' is not an array";
  bool all = !j["records"].empty();
  for (const json& r : j["records"]) {
    if (!r.is_object() || !r.contains("pass") || !r["pass"].is_boolean()) return "record without boolean 'pass'";
    all = all && r["pass"].get<bool>();
  }
  if (j["pass"] != all) return "overall verdict disagrees with the records";
  return std::nullopt;
}

}  // namespace rlab
