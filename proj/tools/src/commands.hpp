#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlab/report.hpp"

namespace rlab::cli {

// Bad invocation: unknown name, unknown config key, missing argument.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string out;
  bool timing = false;
  std::uint64_t seed = 1;
  std::size_t samples = 100;
};

struct VerifyOptions {
  std::string name;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> vectors;
  double tol = 1e-8;
  double fd_tol = 1e-6;
};

struct IdentitiesOptions {
  int m = 2;
  int order = 32;
  double tol = 1e-6;
  double calib_tol = 1e-8;
  double eigen_tol = 1e-8;
  double theta = 1.0;
  double c1 = 0.3;
  double c2 = 0.0;
  std::vector<double> v;  // empty: e_{m+1}
  std::vector<double> w;  // empty: e_1
};

struct FlowOptionsCli {
  int m = 2;
  double lambda = -2.0;
  int n = 1;
  std::vector<double> a;  // empty: all ones
  std::vector<double> b;
  double t_end = 0.01;
  int nodes = 201;
  double half_width = 2.0;
  double dt = 0.0;
  double sigma = 0.2;
  int snapshot_every = 0;
  double t_residual = 0.1;
  double dt_residual = 1e-3;
  double tol = 1e-8;
  double fd_tol = 1e-6;
  double residual_tol = 1e-5;
  double flow_tol = 1e-3;
  double zero_tol = 1e-12;
  bool paper_forms = false;
  bool deturck = false;
  double deturck_t = 0.005;
  double deturck_tol = 1e-2;
  std::string traj;
};

// Names accepted by `verify` (catalog names plus the alias "berger").
std::vector<std::string> verify_names();

ReportEnvelope run_verify(const VerifyOptions& o, const CommonOptions& c);
ReportEnvelope run_identities(const IdentitiesOptions& o, const CommonOptions& c);
ReportEnvelope run_flow(const FlowOptionsCli& o, const CommonOptions& c);
// Re-reads saved reports; throws UsageError on unreadable or malformed files.
ReportEnvelope run_report(const std::vector<std::string>& files);

}  // namespace rlab::cli
