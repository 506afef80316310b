#pragma once

// Report envelope shared by every command: schema version, tool version, the
// configuration actually used, one record per check and the overall verdict.

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rlab {

inline constexpr int kReportSchema = 1;

std::string tool_version();

struct Record {
  std::string kind;  // residual, integral, eigen, flow, ...
  std::string name;
  bool pass = false;
  nlohmann::json data = nlohmann::json::object();
};

class ReportEnvelope {
 public:
  ReportEnvelope(std::string command, nlohmann::json config);

  // `data` may carry its own "pass"; the explicit flag wins.
  void add(std::string kind, std::string name, bool pass, nlohmann::json data);
  const std::vector<Record>& records() const { return records_; }
  // Every record passes (and there is at least one).
  bool pass() const;

  // Keys are emitted in sorted order, so equal inputs give equal bytes.
  nlohmann::json to_json(std::optional<double> wall_clock_s = std::nullopt) const;

 private:
  std::string command_;
  nlohmann::json config_;
  std::vector<Record> records_;
};

// Checks schema and shape of a parsed report; returns a reason on failure.
std::optional<std::string> validate_report(const nlohmann::json& j);

}  // namespace rlab
