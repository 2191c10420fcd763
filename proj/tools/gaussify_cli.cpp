// gaussify: command-line front end for protocol runs, detector-efficiency
// sweeps, Wigner grids and the Gaussian cross-check.
//
// Exit codes: 0 success, 1 config error, 2 numerical failure, 3 tolerance breach.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <utility>

#include "CLI11.hpp"
#include "gaussify/config.hpp"
#include "gaussify/csv.hpp"
#include "gaussify/gaussian.hpp"
#include "gaussify/measures.hpp"
#include "gaussify/protocol.hpp"

namespace {

using namespace gfy;

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kTolerance = 3 };

constexpr double kCheckTolerance = 1e-4;

// Flag values as given on the command line, applied over the config file.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> values;
  bool single_mode = false;
};

void add_common_flags(CLI::App& app, Overrides& o, std::string& config_path) {
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(name, [&o, key](const std::string& v) { o.values.emplace_back(key, v); }, help);
  };
  app.add_option("--config", config_path, "flat key = value config file");
  flag("--epsilon", "epsilon", "epsilon of the initial state");
  flag("--steps", "steps", "number of protocol steps");
  flag("--truncation", "truncation", "per-mode Fock cutoff");
  flag("--max-truncation", "max_truncation", "cap for adaptive truncation");
  flag("--detector", "detector", "vacuum | onoff:<eta> | homodyne:<x>");
  flag("--leak-threshold", "leak_threshold", "largest accepted truncation leak");
  flag("--leak-policy", "leak_policy", "fail | record");
  flag("--out", "out", "output path (prefix for wigner)");
  flag("--jobs", "jobs", "parallel sweep points");
  app.add_flag("--single-mode", o.single_mode, "single-mode variant");
}

RunSettings resolve(const std::string& config_path, const Overrides& o) {
  RunSettings s;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
    for (const auto& [key, value] : parse_key_values(in)) apply_setting(s, key, value);
  }
  for (const auto& [key, value] : o.values) apply_setting(s, key, value);
  if (o.single_mode) s.protocol.single_mode = true;
  validate(s);
  return s;
}

// Writes to --out or stdout.
void emit(const RunSettings& s, const std::string& text) {
  if (!s.out) {
    std::cout << text;
    return;
  }
  std::ofstream out(*s.out);
  if (!out) throw ConfigError("cannot write '" + *s.out + "'");
  out << text;
}

int cmd_run(const RunSettings& s) {
  const DistillationTrace trace = run(s.protocol);
  std::ostringstream os;
  write_trace_csv(os, trace);
  emit(s, os.str());
  return kOk;
}

int cmd_sweep(const RunSettings& s) {
  if (s.protocol.single_mode) throw ConfigError("sweep-eta needs a two-mode configuration");
  const std::vector<double> etas = (s.sweep ? *s.sweep : EtaSweep{}).values();
  const int steps = *std::max_element(s.sweep_steps.begin(), s.sweep_steps.end());

  std::vector<DistillationTrace> traces(etas.size());
  std::vector<std::string> failures(etas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < etas.size(); i = next++) {
      ProtocolConfig c = s.protocol;
      c.steps = steps;
      c.detector = DetectorModel::on_off(etas[i]);
      try {
        traces[i] = run(c);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int jobs = std::min<int>(s.jobs, static_cast<int>(etas.size()));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < etas.size(); ++i)
    if (!failures[i].empty()) throw Error("eta = " + format_number(etas[i]) + ": " + failures[i]);

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < etas.size(); ++i)
    for (int k : s.sweep_steps) {
      const IterationRecord& r = traces[i].records[static_cast<std::size_t>(k)];
      rows.push_back({etas[i], k, r.log_negativity, r.p_cumulative});
    }
  const double initial = logarithmic_negativity(s.protocol.initial());
  std::ostringstream os;
  write_sweep_csv(os, s.protocol, initial, rows);
  emit(s, os.str());
  return kOk;
}

int cmd_wigner(RunSettings s) {
  if (!s.protocol.single_mode) throw ConfigError("wigner needs --single-mode");
  const GridSpec spec = s.grid ? *s.grid : GridSpec{};
  ProtocolConfig c = s.protocol;
  c.steps = *std::max_element(s.wigner_steps.begin(), s.wigner_steps.end());

  // Re-run step by step so every requested state is available.
  DensityOperator rho = c.initial();
  std::vector<DensityOperator> states{rho};
  for (int k = 1; k <= c.steps; ++k) {
    ProtocolConfig one = c;
    one.initial_state = states.back();
    one.truncation = states.back().dims[0];
    one.max_truncation = std::max(one.max_truncation, one.truncation);
    one.steps = 1;
    states.push_back(run(one).final_state);
  }
  const std::string prefix = s.out ? *s.out : "wigner";
  for (int k : s.wigner_steps) {
    const WignerGrid grid = wigner(states[static_cast<std::size_t>(k)], spec);
    const std::string path = prefix + "_step" + std::to_string(k) + ".csv";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    ProtocolConfig echo = s.protocol;
    echo.steps = k;
    write_wigner_csv(out, grid, echo, k);
    std::cout << path << " min " << format_number(grid.min()) << " integral " << format_number(grid.integral()) << '\n';
  }
  return kOk;
}

double max_abs(const RealMatrix& m) { return m.cwiseAbs().maxCoeff(); }

int cmd_gaussian_check(const RunSettings& s) {
  const double r = s.squeezing;
  const int d = s.check_cutoff;
  const GaussianState exact = two_mode_squeezed(r);

  const double symplectic = appendix_S(1).symplectic_residual();
  const DensityOperator fock = DensityOperator::from_pure(two_mode_squeezed_vacuum(r, d));
  const double moments = max_abs(covariance_of_state(fock).gamma - exact.gamma);
  const DensityOperator from_cm = gaussian_to_fock(exact, FockDims::uniform(2, d));
  const double elements = (from_cm.matrix - fock.matrix).cwiseAbs().maxCoeff();
  const DensityOperator stepped = one_step(fock, DetectorModel::ideal()).density();
  const GaussianState predicted = gaussian_step(exact);
  const double step = max_abs(covariance_of_state(stepped).gamma - predicted.gamma);

  std::ostringstream os;
  os << "# squeezing = " << format_number(r) << "\n# cutoff = " << d << '\n';
  os << "check,deviation,tolerance\n";
  os << "appendix_S_symplectic," << format_number(symplectic) << ",1e-12\n";
  os << "fock_moments_vs_covariance," << format_number(moments) << ',' << format_number(kCheckTolerance) << '\n';
  os << "covariance_to_fock_elements," << format_number(elements) << ',' << format_number(kCheckTolerance) << '\n';
  os << "one_step_moments_vs_covariance," << format_number(step) << ',' << format_number(kCheckTolerance) << '\n';
  emit(s, os.str());
  const bool ok = symplectic < 1e-12 && moments < kCheckTolerance && elements < kCheckTolerance && step < kCheckTolerance;
  if (!ok) std::cerr << "gaussian-check: deviation above tolerance\n";
  return ok ? kOk : kTolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-copy Gaussification simulator"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;

  auto* run_cmd = app.add_subcommand("run", "run the protocol and write the per-step trace");
  add_common_flags(*run_cmd, overrides, config_path);

  auto* sweep_cmd = app.add_subcommand("sweep-eta", "log-negativity against on/off detector efficiency");
  add_common_flags(*sweep_cmd, overrides, config_path);
  sweep_cmd->add_option_function<std::string>(
      "--sweep-eta", [&](const std::string& v) { overrides.values.emplace_back("sweep_eta", v); }, "start:stop:count");
  sweep_cmd->add_option_function<std::string>(
      "--sweep-steps", [&](const std::string& v) { overrides.values.emplace_back("sweep_steps", v); },
      "comma-separated step counts (default 1,10)");

  auto* wigner_cmd = app.add_subcommand("wigner", "Wigner grids of the single-mode variant");
  add_common_flags(*wigner_cmd, overrides, config_path);
  wigner_cmd->add_option_function<std::string>(
      "--wigner", [&](const std::string& v) { overrides.values.emplace_back("wigner", v); }, "xmin:xmax:pmin:pmax:n");
  wigner_cmd->add_option_function<std::string>(
      "--wigner-steps", [&](const std::string& v) { overrides.values.emplace_back("wigner_steps", v); },
      "comma-separated steps (default 0,1,2)");

  auto* check_cmd = app.add_subcommand("gaussian-check", "Fock pipeline against the covariance formalism");
  check_cmd->add_option("--config", config_path, "flat key = value config file");
  check_cmd->add_option_function<std::string>(
      "--squeezing,-r", [&](const std::string& v) { overrides.values.emplace_back("squeezing", v); },
      "two-mode squeezing r");
  check_cmd->add_option_function<std::string>(
      "--cutoff,-d", [&](const std::string& v) { overrides.values.emplace_back("check_cutoff", v); }, "Fock cutoff (>= 8)");
  check_cmd->add_option_function<std::string>(
      "--out", [&](const std::string& v) { overrides.values.emplace_back("out", v); }, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  RunSettings settings;
  try {
    settings = resolve(config_path, overrides);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (*run_cmd) return cmd_run(settings);
    if (*sweep_cmd) return cmd_sweep(settings);
    if (*wigner_cmd) return cmd_wigner(settings);
    return cmd_gaussian_check(settings);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
