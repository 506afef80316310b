#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "commands.hpp"
#include "rlab/errors.hpp"

using json = nlohmann::json;
using namespace rlab;
using namespace rlab::cli;

namespace {

constexpr const char* kFooter = R"(Exit codes:
  0  every record passed
  1  a check failed, or the flow left its admissible set
  2  usage error (unknown subcommand, option, config key or catalog name)
  3  parameter outside its documented range

Trajectory CSV (flow --traj FILE), one row per node per snapshot:
  t,node,A,B,phi_1,...,phi_n
  with g = A dx1^2 + B e^{2 x1} sum_{i>=2} dx_i^2 at x1 = -L + node * 2L/(N-1).

--config FILE takes a JSON object; each key k sets --k (underscores become
dashes) unless the option was given on the command line. An optional key
"command" must name the subcommand.)";

std::string option_name(const std::string& key) {
  std::string s = key;
  for (char& ch : s) {
    if (ch == '_') ch = '-';
  }
  return "--" + s;
}

std::vector<std::string> as_strings(const json& v) {
  auto one = [](const json& x) -> std::string {
    if (x.is_string()) return x.get<std::string>();
    if (x.is_boolean()) return x.get<bool>() ? "true" : "false";
    if (x.is_number_integer()) return std::to_string(x.get<long long>());
    if (x.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << x.get<double>();
      return os.str();
    }
    throw UsageError("config: unsupported value " + x.dump());
  };
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const json& x : v) out.push_back(one(x));
  } else {
    out.push_back(one(v));
  }
  return out;
}

void merge_config(const std::string& path, CLI::App& app, CLI::App& sub) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config '" + path + "'");
  json cfg;
  try {
    f >> cfg;
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") {
      if (value != sub.get_name()) {
        throw UsageError("config command '" + value.dump() + "' does not match '" + sub.get_name() + "'");
      }
      continue;
    }
    const std::string name = option_name(key);
    CLI::Option* opt = sub.get_option_no_throw(name);
    if (!opt) opt = app.get_option_no_throw(name);
    if (!opt || name == "--config") throw UsageError("config: unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    for (const auto& s : as_strings(value)) opt->add_result(s);
    opt->run_callback();
  }
}

// k=v pairs; v with commas is a vector.
void parse_params(const std::vector<std::string>& items, VerifyOptions& o) {
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    std::vector<double> xs;
    std::stringstream ss(val);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        xs.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        throw UsageError("--param " + key + ": not a number: '" + tok + "'");
      }
    }
    if (val.find(',') == std::string::npos && xs.size() == 1) {
      o.scalars[key] = xs[0];
    } else {
      o.vectors[key] = xs;
    }
  }
}

void emit(const ReportEnvelope& env, const CommonOptions& c, double seconds) {
  const std::string text = env.to_json(c.timing ? std::optional<double>(seconds) : std::nullopt).dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(c.out);
    if (!f) throw UsageError("cannot write '" + c.out + "'");
    f << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ricci_lab: checks for Ricci-harmonic solitons and their flow"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions common;
  std::string config_path;
  app.add_option("--out", common.out, "Write the JSON report here instead of stdout");
  app.add_flag("--timing", common.timing, "Add wall_clock_s to the report");
  app.add_option("--seed", common.seed, "Sampling seed");
  app.add_option("--samples", common.samples, "Sample points per pointwise check");
  app.add_option("--config", config_path, "JSON file of option values");

  // verify
  VerifyOptions vo;
  std::vector<std::string> raw_params;
  std::map<std::string, double> named_scalars;
  std::map<std::string, std::vector<double>> named_vectors;
  CLI::App* verify = app.add_subcommand("verify", "Pointwise checks of a catalog entry");
  verify->add_option("name", vo.name, "Catalog name (see --list)");
  bool list = false;
  verify->add_flag("--list", list, "Print catalog names and exit");
  for (const char* k : {"kappa", "tau", "m", "lambda", "r", "theta", "c1", "c2", "n"}) {
    verify->add_option_function<double>(
        std::string("--") + k, [&named_scalars, k](double x) { named_scalars[k] = x; }, "Parameter " + std::string(k));
  }
  for (const char* k : {"a", "b", "v", "w"}) {
    verify->add_option_function<std::vector<double>>(
        std::string("--") + k, [&named_vectors, k](const std::vector<double>& x) { named_vectors[k] = x; },
        "Vector parameter " + std::string(k));
  }
  verify->add_option("--param", raw_params, "Extra parameter key=value or key=x,y,z");
  verify->add_option("--tol", vo.tol, "Tolerance for closed-form residuals");
  verify->add_option("--fd-tol", vo.fd_tol, "Tolerance for finite-difference residuals");

  // identities
  IdentitiesOptions io;
  CLI::App* ident = app.add_subcommand("identities", "Integral identities and eigen check on the round sphere");
  ident->add_option("--m", io.m, "Sphere dimension (2 or 3)");
  ident->add_option("--order", io.order, "Quadrature points per angle");
  ident->add_option("--tol", io.tol);
  ident->add_option("--calib-tol", io.calib_tol);
  ident->add_option("--eigen-tol", io.eigen_tol);
  ident->add_option("--theta", io.theta);
  ident->add_option("--c1", io.c1);
  ident->add_option("--c2", io.c2);
  ident->add_option("--v", io.v, "Unit vector in R^{m+1} (default e_{m+1})");
  ident->add_option("--w", io.w, "Unit vector in R^{m+1} (default e_1)");

  // flow
  FlowOptionsCli fo;
  CLI::App* flow = app.add_subcommand("flow", "Self-similar oracle, flow residual and reduced integrator");
  flow->add_option("--m", fo.m);
  flow->add_option("--lambda", fo.lambda);
  flow->add_option("--n", fo.n, "Target dimension");
  flow->add_option("--a", fo.a);
  flow->add_option("--b", fo.b);
  flow->add_option("--T", fo.t_end, "Integration horizon");
  flow->add_option("--N", fo.nodes, "Grid nodes");
  flow->add_option("--L", fo.half_width, "Grid covers [-L, L]");
  flow->add_option("--dt", fo.dt, "Time step; 0 picks one under the stability bound");
  flow->add_option("--sigma", fo.sigma, "Stability factor");
  flow->add_option("--snapshot-every", fo.snapshot_every);
  flow->add_option("--t-residual", fo.t_residual);
  flow->add_option("--dt-residual", fo.dt_residual);
  flow->add_option("--tol", fo.tol);
  flow->add_option("--fd-tol", fo.fd_tol);
  flow->add_option("--residual-tol", fo.residual_tol);
  flow->add_option("--flow-tol", fo.flow_tol);
  flow->add_option("--zero-tol", fo.zero_tol);
  flow->add_flag("--paper-forms", fo.paper_forms, "Per-point residuals of the printed closed forms");
  flow->add_flag("--deturck", fo.deturck, "Also run the DeTurck correspondence");
  flow->add_option("--deturck-T", fo.deturck_t);
  flow->add_option("--deturck-tol", fo.deturck_tol);
  flow->add_option("--traj", fo.traj, "Write the trajectory CSV here");

  // report
  std::vector<std::string> files;
  CLI::App* report = app.add_subcommand("report", "Validate and summarise saved reports");
  report->add_option("files", files, "Report JSON files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) merge_config(config_path, app, *sub);

    const auto start = std::chrono::steady_clock::now();
    std::optional<ReportEnvelope> env;
    if (sub == verify) {
      if (list) {
        for (const auto& n : verify_names()) std::cout << n << "\n";
        return 0;
      }
      if (vo.name.empty()) throw UsageError("verify: missing catalog name");
      parse_params(raw_params, vo);
      for (const auto& [k, x] : named_scalars) vo.scalars[k] = x;
      for (const auto& [k, x] : named_vectors) vo.vectors[k] = x;
      env = run_verify(vo, common);
    } else if (sub == ident) {
      env = run_identities(io, common);
    } else if (sub == flow) {
      env = run_flow(fo, common);
    } else {
      env = run_report(files);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(*env, common, seconds);
    return env->pass() ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 3;
  } catch (const WindowError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 3;
  } catch (const SingularMetricError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 3;
  } catch (const DimensionError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 3;
  } catch (const InvariantBreach& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
