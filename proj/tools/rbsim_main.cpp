// rbsim: single-qubit gate-error simulator with composite-pulse compensation
// and randomized-benchmarking analysis.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbsim/clifford.hpp"
#include "rbsim/config.hpp"
#include "rbsim/fit.hpp"
#include "rbsim/rb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rbsim;

namespace {

constexpr const char* kVersion = "rbsim 0.1.0";

void print_error(const std::string& message, const std::string& path = "") {
  json err;
  err["error"] = message;
  if (!path.empty()) err["path"] = path;
  std::cerr << err.dump() << "\n";
}

ExperimentConfig load_config(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("", "cannot open config file: " + config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

fs::path resolve_out_dir(const ExperimentConfig& cfg, const std::string& cli_out_dir) {
  if (!cli_out_dir.empty()) return cli_out_dir;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("RBSIM_OUT_DIR")) {
    if (*env) return env;
  }
  return "out";
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool exact = false;
  int threads = 0;
  int repeats = 0;  // sweep only; 0 = config value
  bool dump_config_only = false;
};

ExperimentConfig resolve(const RunOptions& opt) {
  ExperimentConfig cfg = load_config(opt.config_path);
  if (opt.seed_set) cfg.seed = opt.seed;
  if (opt.exact) cfg.measurement = MeasurementMode::ExactProbability;
  if (opt.repeats > 0) cfg.sweep_repeats = opt.repeats;
  return cfg;
}

int cmd_rb_run(const RunOptions& opt) {
  ExperimentConfig cfg = resolve(opt);
  if (opt.dump_config_only) {
    std::cout << dump_config(cfg) << "\n";
    return 0;
  }
  RBExperiment experiment = cfg.to_experiment();
  std::vector<SequenceRecord> records = run_experiment(experiment, opt.threads);

  fs::path dir = resolve_out_dir(cfg, opt.out_dir);
  fs::create_directories(dir);

  {
    std::ostringstream csv;
    write_records_csv(csv, experiment, records);
    write_file(dir / (cfg.prefix + "_records.csv"), csv.str());
  }
  {
    std::ostringstream js;
    write_records_json(js, experiment, records);
    write_file(dir / (cfg.prefix + "_records.json"), js.str());
  }

  auto aggregates = aggregate(records);
  DecayFit fit = fit_decay(aggregates);
  write_file(dir / (cfg.prefix + "_fit.json"), fit_report_json(fit, aggregates) + "\n");
  {
    std::ostringstream decay;
    decay << "L,mean_survival,variance_bound,fit_survival\n";
    char buf[128];
    for (const auto& a : aggregates) {
      double model = fit.a0 * std::pow(fit.p, a.length) + fit.b0;
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", a.length, a.mean_survival,
                    a.variance_bound, model);
      decay << buf;
    }
    write_file(dir / (cfg.prefix + "_decay.csv"), decay.str());
  }

  std::printf("avg_error_per_clifford = %.6e +- %.6e (p = %.8f)\n", fit.avg_error,
              fit.stderr_avg_error, fit.p);
  std::printf("artifacts written to %s\n", dir.string().c_str());
  if (!fit.converged) {
    print_error("decay fit did not converge");
    return 3;
  }
  return 0;
}

int cmd_rb_sweep(const RunOptions& opt) {
  ExperimentConfig cfg = resolve(opt);
  if (opt.dump_config_only) {
    std::cout << dump_config(cfg) << "\n";
    return 0;
  }
  if (cfg.sweep_epsilons.empty()) throw ConfigError("sweep.epsilons", "missing or empty");

  RBExperiment base = cfg.to_experiment();
  auto rows =
      epsilon_sweep(base, cfg.sweep_epsilons, cfg.sweep_schemes, cfg.sweep_repeats, opt.threads);

  fs::path dir = resolve_out_dir(cfg, opt.out_dir);
  fs::create_directories(dir);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_file(dir / (cfg.prefix + "_sweep.csv"), csv.str());

  int flagged = 0;
  for (const auto& r : rows) {
    if (!r.flag.empty()) ++flagged;
  }
  std::printf("%zu sweep rows written to %s (%d flagged)\n", rows.size(),
              (dir / (cfg.prefix + "_sweep.csv")).string().c_str(), flagged);
  return 0;
}

int cmd_expand(double theta, double phi, const std::string& scheme_str, bool as_json) {
  CompensationScheme scheme = CompensationScheme::primitive();
  switch (scheme_from_name(scheme_str)) {
    case SchemeKind::Primitive: break;
    case SchemeKind::B2: scheme = CompensationScheme::b2(); break;
    case SchemeKind::PD6: scheme = CompensationScheme::pd6(); break;
  }
  PulseSequence seq = expand(Pulse::drive(theta, phi), scheme);
  if (as_json) {
    json j;
    j["scheme"] = scheme_str;
    j["target"] = {{"theta", theta}, {"phi", phi}};
    j["total_drive_angle"] = total_drive_angle(seq);
    j["pulses"] = json::array();
    for (const Pulse& p : seq) {
      j["pulses"].push_back({{"theta", p.theta},
                             {"phi", p.phi},
                             {"kind", p.kind == PulseKind::PhysicalDrive ? "drive" : "frame"}});
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("# %zu pulses, applied top to bottom\n", seq.size());
    std::printf("%-12s %-12s %s\n", "theta", "phi", "kind");
    for (const Pulse& p : seq) {
      std::printf("%-12.8f %-12.8f %s\n", p.theta, p.phi,
                  p.kind == PulseKind::PhysicalDrive ? "drive" : "frame");
    }
    std::printf("total drive angle: %.8f rad (%.4f pi)\n", total_drive_angle(seq),
                total_drive_angle(seq) / 3.14159265358979323846);
  }
  return 0;
}

int cmd_clifford_check(bool as_json, int corrupt_gate, double corrupt_by) {
  CliffordAuditResult result = audit_clifford_table(corrupt_gate, corrupt_by);
  if (as_json) {
    json j;
    j["passed"] = result.passed;
    j["gates"] = json::array();
    for (int i = 0; i < 24; ++i) {
      j["gates"].push_back({{"index", i + 1}, {"ok", result.gate_ok[static_cast<size_t>(i)]}});
    }
    j["failures"] = result.failures;
    std::cout << j.dump(2) << "\n";
  } else {
    for (int i = 0; i < 24; ++i) {
      std::printf("gate %2d: %s\n", i + 1,
                  result.gate_ok[static_cast<size_t>(i)] ? "pass" : "FAIL");
    }
    for (const auto& f : result.failures) std::printf("%s\n", f.c_str());
    std::printf("clifford table audit: %s\n", result.passed ? "PASS" : "FAIL");
  }
  return result.passed ? 0 : 1;
}

int cmd_fit(const std::string& records_path, const std::string& out_path, double spam_a0,
            double spam_b0, bool as_json) {
  std::ifstream in(records_path);
  if (!in) {
    print_error("cannot open records file: " + records_path);
    return 2;
  }
  bool json_input = records_path.size() > 5 &&
                    records_path.compare(records_path.size() - 5, 5, ".json") == 0;
  auto records = json_input ? read_records_json(in) : read_records_csv(in);
  auto aggregates = aggregate(records);
  DecayFit fit = fit_decay(aggregates, spam_a0, spam_b0);
  std::string report = fit_report_json(fit, aggregates) + "\n";
  if (!out_path.empty()) write_file(out_path, report);
  if (as_json || out_path.empty()) {
    std::cout << report;
  } else {
    std::printf("avg_error_per_clifford = %.6e +- %.6e (p = %.8f)\n", fit.avg_error,
                fit.stderr_avg_error, fit.p);
  }
  if (!fit.converged) {
    print_error("decay fit did not converge");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-qubit composite-pulse gate error simulator and RB analyzer"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunOptions opt;

  CLI::App* rb = app.add_subcommand("rb", "randomized benchmarking experiments");
  rb->require_subcommand(1);
  auto add_run_options = [&opt](CLI::App* cmd, bool sweep) {
    cmd->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out-dir", opt.out_dir,
                    "output directory (default: $RBSIM_OUT_DIR or ./out)");
    cmd->add_option("--seed", opt.seed, "override config seed")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    cmd->add_flag("--exact", opt.exact, "exact-probability measurement mode");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
    cmd->add_flag("--dump-config", opt.dump_config_only, "print resolved config and exit");
    if (sweep) cmd->add_option("--repeats", opt.repeats, "repeats per sweep point");
  };
  CLI::App* rb_run = rb->add_subcommand("run", "run one experiment and fit the decay");
  add_run_options(rb_run, false);
  CLI::App* rb_sweep = rb->add_subcommand("sweep", "run a (epsilon, scheme) grid and fit each");
  add_run_options(rb_sweep, true);

  double theta = 0.0, phi = 0.0;
  std::string scheme_str;
  bool expand_json = false;
  CLI::App* expand_cmd = app.add_subcommand("expand", "expand a rotation into a pulse sequence");
  expand_cmd->add_option("theta", theta, "target rotation angle (radians)")->required();
  expand_cmd->add_option("phi", phi, "target rotation phase (radians)")->required();
  expand_cmd->add_option("scheme", scheme_str, "primitive | b2 | pd6")->required();
  expand_cmd->add_flag("--json", expand_json, "machine-readable output");

  bool clifford_json = false;
  int corrupt_gate = 0;
  double corrupt_by = 0.0;
  CLI::App* clifford_cmd = app.add_subcommand("clifford", "Clifford table utilities");
  clifford_cmd->require_subcommand(1);
  CLI::App* check_cmd =
      clifford_cmd->add_subcommand("check", "audit closure, distinctness and decompositions");
  check_cmd->add_flag("--json", clifford_json, "machine-readable report");
  check_cmd->add_option("--corrupt-gate", corrupt_gate,
                        "rotate one gate's first drive phase before auditing (test hook)");
  check_cmd->add_option("--corrupt-by", corrupt_by, "corruption angle in radians");

  std::string records_path, fit_out;
  double spam_a0 = 0.47, spam_b0 = 0.517;
  bool fit_json = false;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit an existing records CSV");
  fit_cmd->add_option("--records", records_path, "records CSV from rb run")->required();
  fit_cmd->add_option("--out", fit_out, "write fit report JSON here");
  fit_cmd->add_option("--spam-a0", spam_a0, "pass-1 frozen A0");
  fit_cmd->add_option("--spam-b0", spam_b0, "pass-1 frozen B0");
  fit_cmd->add_flag("--json", fit_json, "print the report JSON to stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rb_run->parsed()) return cmd_rb_run(opt);
    if (rb_sweep->parsed()) return cmd_rb_sweep(opt);
    if (expand_cmd->parsed()) return cmd_expand(theta, phi, scheme_str, expand_json);
    if (check_cmd->parsed()) return cmd_clifford_check(clifford_json, corrupt_gate, corrupt_by);
    if (fit_cmd->parsed()) return cmd_fit(records_path, fit_out, spam_a0, spam_b0, fit_json);
  } catch (const ConfigError& e) {
    print_error(e.what(), e.path);
    return 2;
  } catch (const std::invalid_argument& e) {
    print_error(e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error(e.what());
    return 1;
  }
  return 0;
}
