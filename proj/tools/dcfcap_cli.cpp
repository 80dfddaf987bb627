// dcfcap command line: solve, simulate, sweep, reproduce, validate.
//
// Exit codes: 0 ok, 1 usage or config error, 2 validation failure,
// 3 solver failure. DCFCAP_WORKERS sets the worker thread count.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dcfcap/dcfcap.hpp"

namespace {

using namespace dcfcap;

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kSolver = 3 };

struct PointArgs {
  std::string mode = "2way";
  int n = 10;
  std::string snr_db = "inf";
  std::string z0_db = "inf";
  std::int64_t payload = 1024;
  std::optional<double> fer;
  std::string modulation = "dbpsk";
  int spreading_factor = 11;
  bool no_ctrl_phy = false;

  void add_to(CLI::App& app) {
    app.add_option("--mode", mode, "2way or 4way")->capture_default_str();
    app.add_option("-n,--stations", n, "number of stations")->capture_default_str();
    app.add_option("--snr-db", snr_db, "SNR in dB, or inf")->capture_default_str();
    app.add_option("--z0-db", z0_db, "capture ratio in dB, or inf")->capture_default_str();
    app.add_option("--payload", payload, "payload bytes")->capture_default_str();
    app.add_option("--fer", fer, "data frame error rate (overrides the SNR-derived value)");
    app.add_option("--modulation", modulation, "dbpsk or dqpsk")->capture_default_str();
    app.add_option("--spreading-factor", spreading_factor)->capture_default_str();
    app.add_flag("--no-ctrl-phy-header", no_ctrl_phy,
                 "send RTS/CTS/ACK without the PHY preamble and header");
  }

  MacParams mac() const {
    MacParams m;
    m.ctrl_frames_carry_phy_header = !no_ctrl_phy;
    return m;
  }
  LinkModel link() const {
    LinkModel l;
    l.snr = db_to_linear(parse_db(snr_db));
    l.payload_bytes = payload;
    l.modulation = parse_modulation(modulation);
    return l;
  }
  CaptureParams capture() const {
    CaptureParams cp;
    cp.z0 = db_to_linear(parse_db(z0_db));
    cp.spreading_factor = spreading_factor;
    return cp;
  }
  double p_e() const { return fer ? *fer : dcfcap::fer(link()); }
};

int cmd_solve(const PointArgs& a) {
  const MacParams mac = a.mac();
  const AccessMode mode = parse_access_mode(a.mode);
  const double pe = a.p_e();
  const ModelSolution s = analyze(a.n, mac, mode, pe, a.capture(), a.payload);
  nlohmann::json j{{"mode", to_string(mode)},   {"n", a.n},
                   {"p_e", pe},                 {"tau", s.tau},
                   {"p_col", s.p_col},          {"p_cap", s.p_cap},
                   {"p_eq", s.p_eq},            {"s_theory_mbps", s.s_mbps},
                   {"s_bianchi_mbps", bianchi_reference(a.n, mac, mode, a.payload).s_mbps},
                   {"s_max_mbps", bianchi_s_max(mac, mode, a.payload)},
                   {"iterations", s.iterations}, {"residual", s.residual}};
  std::cout << j.dump(2) << '\n';
  return kOk;
}

struct SimArgs {
  int replications = 100;
  std::int64_t slots = 2'000'000;
  std::uint64_t seed = 1;
  std::string rule = "locked";
  std::string capture_mode = "power_controlled";
  bool per_rep = false;
};

int cmd_simulate(const PointArgs& a, const SimArgs& s) {
  SimConfig cfg;
  cfg.n_stations = a.n;
  cfg.mac = a.mac();
  cfg.mode = parse_access_mode(a.mode);
  cfg.link = a.link();
  cfg.cp = a.capture();
  cfg.cp.mode = parse_capture_mode(s.capture_mode);
  cfg.capture_rule = parse_capture_rule(s.rule);
  cfg.replications = s.replications;
  cfg.slots_per_rep = s.slots;
  cfg.seed = s.seed;
  if (a.fer) cfg.fer_override = *a.fer;
  const SimResult r = run(cfg);
  nlohmann::json j{{"mode", to_string(cfg.mode)},
                   {"n", cfg.n_stations},
                   {"p_e", config_fer(cfg)},
                   {"throughput_mbps", r.throughput_mbps},
                   {"ci95", r.ci95},
                   {"counters",
                    {{"idle_slots", r.counters.idle_slots},
                     {"successes", r.counters.successes},
                     {"collisions", r.counters.collisions},
                     {"captures", r.counters.captures},
                     {"channel_errors", r.counters.channel_errors},
                     {"attempts", r.counters.attempts}}}};
  if (s.per_rep)
    for (const auto& rep : r.per_rep) j["per_rep"].push_back(rep.throughput_mbps);
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_sweep(const std::string& file, const RunOverrides& ov, const std::string& out) {
  std::vector<ExperimentSpec> specs = parse_experiments(load_json_file(file));
  for (auto& s : specs) ov.apply(s);
  std::ofstream fout;
  if (!out.empty()) {
    fout.open(out);
    if (!fout) throw ConfigError("cannot write '" + out + "'");
  }
  std::ostream& os = out.empty() ? std::cout : fout;
  write_csv_header(os);
  for (const auto& s : specs)
    for (const auto& row : run_experiment(s)) write_csv_row(os, row);
  return kOk;
}

int cmd_reproduce(const std::string& target, const RunOverrides& ov, const std::string& out,
                  const std::string& config_dir) {
  for (const auto& p : reproduce(target, out, config_dir, ov)) std::cerr << "wrote " << p.string() << '\n';
  return kOk;
}

int cmd_validate(long draws, const std::string& out) {
  ValidationOptions opt;
  opt.capture_draws = draws;
  const ValidationReport report = validate(opt);
  const std::string text = report.to_json().dump(2);
  if (out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream(out) << text << '\n';
  }
  for (const auto& c : report.checks)
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << '\n';
  return report.passed() ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"802.11 DCF saturation throughput with channel errors and capture"};
  app.require_subcommand(1);

  PointArgs point;
  SimArgs sim;
  RunOverrides ov;
  std::string out;
  std::string config_dir = default_config_dir();
  std::string file, target;
  long draws = 1'000'000;
  bool no_sim = false;

  auto* solve = app.add_subcommand("solve", "solve the analytic model at one point");
  point.add_to(*solve);

  auto* simulate = app.add_subcommand("simulate", "simulate one point");
  point.add_to(*simulate);
  simulate->add_option("--replications", sim.replications)->capture_default_str();
  simulate->add_option("--slots", sim.slots, "backoff slots per replication")->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--rule", sim.rule, "locked or strongest")->capture_default_str();
  simulate->add_option("--capture-mode", sim.capture_mode, "power_controlled or geometric")
      ->capture_default_str();
  simulate->add_flag("--per-rep", sim.per_rep, "include per-replication throughputs");

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--replications", ov.replications);
    cmd->add_option("--slots", ov.slots_per_rep, "backoff slots per replication");
    cmd->add_option("--seed", ov.seed);
    cmd->add_flag("--no-sim", no_sim, "analytic columns only");
  };

  auto* sweep = app.add_subcommand("sweep", "run a sweep spec file and print CSV");
  sweep->add_option("spec-file", file)->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", out, "CSV path (default stdout)");
  add_overrides(sweep);

  auto* repro = app.add_subcommand("reproduce", "write results/<target>/*.csv");
  repro->add_option("target", target, "fig2..fig9 or table2")->required();
  repro->add_option("-o,--out", out, "output root (default results)");
  repro->add_option("--config-dir", config_dir)->capture_default_str();
  add_overrides(repro);

  auto* val = app.add_subcommand("validate", "run the oracle and invariant checks");
  val->add_option("--draws", draws, "Monte-Carlo capture draws per case")->capture_default_str();
  val->add_option("-o,--out", out, "JSON report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (no_sim) ov.run_sim = false;

  try {
    if (*solve) return cmd_solve(point);
    if (*simulate) return cmd_simulate(point, sim);
    if (*sweep) return cmd_sweep(file, ov, out);
    if (*repro) {
      if (!is_reproduce_target(target)) {
        std::cerr << "unknown target '" << target << "' (expected fig2..fig9 or table2)\n";
        return kUsage;
      }
      return cmd_reproduce(target, ov, out.empty() ? "results" : out, config_dir);
    }
    if (*val) return cmd_validate(draws, out);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << " (tau=" << e.last_tau()
              << ", residual=" << e.residual() << ")\n";
    return kSolver;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnimplementedModulation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
