#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcfcap/capture.hpp"
#include "dcfcap/dcf_analytic.hpp"
#include "dcfcap/dcf_sim.hpp"
#include "dcfcap/error.hpp"
#include "dcfcap/mac_params.hpp"
#include "dcfcap/parallel.hpp"
#include "dcfcap/phy_link.hpp"
#include "dcfcap/units.hpp"

namespace dcfcap {

using json = nlohmann::json;

struct ExperimentSpec {
  std::string name = "experiment";
  AccessMode mode = AccessMode::TwoWay;
  std::vector<double> snr_db;
  std::vector<double> z0_db;
  std::vector<int> n;
  std::vector<std::int64_t> payload_bytes;
  MacParams mac{};
  CaptureParams cp{};
  CaptureRule capture_rule = CaptureRule::Locked;
  LinkModel link{};
  bool run_sim = false;
  int replications = 100;
  std::int64_t slots_per_rep = 200'000;
  /// When set, a point's slots_per_rep grows until the model predicts at
  /// least this many successful frames per replication.
  std::optional<double> min_successes_per_rep;
  std::int64_t max_slots_per_rep = 400'000'000;
  std::uint64_t seed = 1;

  static constexpr std::size_t kMaxPoints = 10'000;

  void validate() const {
    if (snr_db.empty() && z0_db.empty() && n.empty() && payload_bytes.empty())
      throw ConfigError(name + ": at least one sweep axis must be non-empty");
    if (point_count() > kMaxPoints) throw ConfigError(name + ": sweep exceeds 10^4 points");
    for (int v : n)
      if (v < 1) throw ConfigError(name + ": n must be >= 1");
    for (auto v : payload_bytes)
      if (v < 1) throw ConfigError(name + ": payload_bytes must be >= 1");
    if (replications < 1) throw ConfigError(name + ": replications must be >= 1");
    if (slots_per_rep < 1) throw ConfigError(name + ": slots_per_rep must be >= 1");
    mac.validate();
  }

  std::size_t point_count() const {
    auto len = [](std::size_t s) { return std::max<std::size_t>(s, 1); };
    return len(snr_db.size()) * len(z0_db.size()) * len(n.size()) * len(payload_bytes.size());
  }
};

/// One sweep point: analytic model, optional simulation, and the reference
/// curves plotted alongside.
struct ResultRow {
  AccessMode mode = AccessMode::TwoWay;
  int n = 0;
  double snr_db = kInfinity;
  double z0_db = kInfinity;
  std::int64_t payload_bytes = 0;
  double p_e = 0.0;
  double tau = 0.0;
  double p_col = 0.0;
  double p_cap = 0.0;
  double p_eq = 0.0;
  double s_theory_mbps = 0.0;
  std::optional<double> s_sim_mbps;
  std::optional<double> ci95;
  double s_bianchi_mbps = 0.0;
  double s_max_mbps = 0.0;
  bool converged = true;
};

// ---------------------------------------------------------------------------
// Spec parsing

namespace detail {

inline double json_db(const json& v) {
  if (v.is_string()) return parse_db(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  throw ConfigError("expected a dB number or \"inf\", got " + v.dump());
}

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

inline void apply_mac(const json& j, MacParams& mac) {
  reject_unknown(j,
                 {"w_min", "max_stage", "slot_sigma", "sifs", "difs", "eifs", "prop_delay",
                  "ack_bytes", "rts_bytes", "cts_bytes", "mac_header_bytes", "phy_header_bytes",
                  "ack_timeout", "cts_timeout", "data_rate", "ctrl_rate",
                  "ctrl_frames_carry_phy_header"},
                 "mac");
  read(j, "w_min", mac.w_min);
  read(j, "max_stage", mac.max_stage);
  read(j, "slot_sigma", mac.slot_sigma);
  read(j, "sifs", mac.sifs);
  read(j, "difs", mac.difs);
  read(j, "eifs", mac.eifs);
  read(j, "prop_delay", mac.prop_delay);
  read(j, "ack_bytes", mac.ack_bytes);
  read(j, "rts_bytes", mac.rts_bytes);
  read(j, "cts_bytes", mac.cts_bytes);
  read(j, "mac_header_bytes", mac.mac_header_bytes);
  read(j, "phy_header_bytes", mac.phy_header_bytes);
  read(j, "ack_timeout", mac.ack_timeout);
  read(j, "cts_timeout", mac.cts_timeout);
  read(j, "data_rate", mac.data_rate);
  read(j, "ctrl_rate", mac.ctrl_rate);
  read(j, "ctrl_frames_carry_phy_header", mac.ctrl_frames_carry_phy_header);
}

inline void apply_capture(const json& j, CaptureParams& cp, CaptureRule& rule) {
  reject_unknown(j,
                 {"z0_db", "spreading_factor", "mode", "rule", "radius_m", "path_loss_exp",
                  "path_const", "tx_power", "r_min_m"},
                 "capture");
  if (j.contains("z0_db")) cp.z0 = db_to_linear(json_db(j.at("z0_db")));
  read(j, "spreading_factor", cp.spreading_factor);
  if (j.contains("mode")) cp.mode = parse_capture_mode(j.at("mode").get<std::string>());
  if (j.contains("rule")) rule = parse_capture_rule(j.at("rule").get<std::string>());
  read(j, "radius_m", cp.radius_m);
  read(j, "path_loss_exp", cp.path_loss_exp);
  read(j, "path_const", cp.path_const);
  read(j, "tx_power", cp.tx_power);
  read(j, "r_min_m", cp.r_min_m);
}

inline void apply_link(const json& j, LinkModel& link) {
  reject_unknown(j, {"modulation", "mac_header_bytes", "plcp_bytes"}, "link");
  if (j.contains("modulation")) link.modulation = parse_modulation(j.at("modulation").get<std::string>());
  read(j, "mac_header_bytes", link.mac_header_bytes);
  read(j, "plcp_bytes", link.plcp_bytes);
}

inline void apply_sweep(const json& j, ExperimentSpec& spec) {
  reject_unknown(j, {"snr_db", "z0_db", "n", "payload_bytes"}, "sweep");
  auto db_list = [](const json& arr) {
    std::vector<double> out;
    for (const auto& v : arr) out.push_back(json_db(v));
    return out;
  };
  if (j.contains("snr_db")) spec.snr_db = db_list(j.at("snr_db"));
  if (j.contains("z0_db")) spec.z0_db = db_list(j.at("z0_db"));
  read(j, "n", spec.n);
  read(j, "payload_bytes", spec.payload_bytes);
}

inline void apply_experiment(const json& j, ExperimentSpec& spec) {
  reject_unknown(j,
                 {"name", "mode", "sweep", "mac", "capture", "link", "run_sim", "replications",
                  "slots_per_rep", "min_successes_per_rep", "max_slots_per_rep", "seed",
                  "experiments", "description"},
                 "experiment");
  read(j, "name", spec.name);
  if (j.contains("mode")) spec.mode = parse_access_mode(j.at("mode").get<std::string>());
  if (j.contains("sweep")) apply_sweep(j.at("sweep"), spec);
  if (j.contains("mac")) apply_mac(j.at("mac"), spec.mac);
  if (j.contains("capture")) apply_capture(j.at("capture"), spec.cp, spec.capture_rule);
  if (j.contains("link")) apply_link(j.at("link"), spec.link);
  read(j, "run_sim", spec.run_sim);
  read(j, "replications", spec.replications);
  read(j, "slots_per_rep", spec.slots_per_rep);
  if (j.contains("min_successes_per_rep"))
    spec.min_successes_per_rep = j.at("min_successes_per_rep").get<double>();
  read(j, "max_slots_per_rep", spec.max_slots_per_rep);
  read(j, "seed", spec.seed);
}

}  // namespace detail

/// Parses a spec document. Either a single experiment, or top-level defaults
/// plus an "experiments" array whose entries override them.
inline std::vector<ExperimentSpec> parse_experiments(const json& doc) {
  ExperimentSpec defaults;
  json top = doc;
  top.erase("experiments");
  detail::apply_experiment(top, defaults);

  std::vector<ExperimentSpec> out;
  if (doc.contains("experiments")) {
    for (const auto& e : doc.at("experiments")) {
      ExperimentSpec spec = defaults;
      detail::apply_experiment(e, spec);
      out.push_back(std::move(spec));
    }
  } else {
    out.push_back(std::move(defaults));
  }
  for (const auto& s : out) s.validate();
  return out;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Sweep execution

struct SweepPoint {
  int n = 0;
  std::int64_t payload_bytes = 0;
  double z0_db = kInfinity;
  double snr_db = kInfinity;
};

/// Cartesian product in n, payload, z0, snr order (snr varies fastest).
inline std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec) {
  auto or_default = [](auto values, auto fallback) {
    if (values.empty()) values.push_back(fallback);
    return values;
  };
  const auto ns = or_default(spec.n, 10);
  const auto pls = or_default(spec.payload_bytes, std::int64_t{1024});
  const auto z0s = or_default(spec.z0_db, kInfinity);
  const auto snrs = or_default(spec.snr_db, kInfinity);
  std::vector<SweepPoint> pts;
  for (int n : ns)
    for (auto pl : pls)
      for (double z : z0s)
        for (double snr : snrs) pts.push_back({n, pl, z, snr});
  return pts;
}

inline LinkModel point_link(const ExperimentSpec& spec, const SweepPoint& pt) {
  LinkModel link = spec.link;
  link.snr = db_to_linear(pt.snr_db);
  link.payload_bytes = pt.payload_bytes;
  return link;
}

inline CaptureParams point_capture(const ExperimentSpec& spec, const SweepPoint& pt) {
  CaptureParams cp = spec.cp;
  cp.z0 = db_to_linear(pt.z0_db);
  return cp;
}

/// Analytic columns of a row. Solver failure leaves NaNs and converged = false.
inline ResultRow analytic_row(const ExperimentSpec& spec, const SweepPoint& pt) {
  ResultRow row;
  row.mode = spec.mode;
  row.n = pt.n;
  row.snr_db = pt.snr_db;
  row.z0_db = pt.z0_db;
  row.payload_bytes = pt.payload_bytes;
  row.p_e = fer(point_link(spec, pt));
  row.s_max_mbps = bianchi_s_max(spec.mac, spec.mode, pt.payload_bytes);
  try {
    const ModelSolution s =
        analyze(pt.n, spec.mac, spec.mode, row.p_e, point_capture(spec, pt), pt.payload_bytes);
    row.tau = s.tau;
    row.p_col = s.p_col;
    row.p_cap = s.p_cap;
    row.p_eq = s.p_eq;
    row.s_theory_mbps = s.s_mbps;
    row.s_bianchi_mbps = bianchi_reference(pt.n, spec.mac, spec.mode, pt.payload_bytes).s_mbps;
  } catch (const SolverError&) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    row.tau = row.p_col = row.p_cap = row.p_eq = row.s_theory_mbps = row.s_bianchi_mbps = nan;
    row.converged = false;
  }
  return row;
}

inline SimConfig point_sim_config(const ExperimentSpec& spec, const SweepPoint& pt,
                                  const ResultRow& row) {
  SimConfig cfg;
  cfg.n_stations = pt.n;
  cfg.mac = spec.mac;
  cfg.mode = spec.mode;
  cfg.link = point_link(spec, pt);
  cfg.cp = point_capture(spec, pt);
  cfg.capture_rule = spec.capture_rule;
  cfg.replications = spec.replications;
  cfg.seed = spec.seed;
  cfg.fer_override = row.p_e;
  cfg.slots_per_rep = spec.slots_per_rep;
  if (spec.min_successes_per_rep && row.converged) {
    // Expected successful frames per generic slot under the model.
    const double p_t = -std::expm1(pt.n * std::log1p(-row.tau));
    const double p_s = p_t > 0 ? (pt.n * row.tau * std::pow(1.0 - row.tau, pt.n - 1) + row.p_cap) / p_t : 0;
    const double rate = p_t * p_s * (1.0 - row.p_e);
    if (rate > 0) {
      const double needed = std::ceil(*spec.min_successes_per_rep / rate);
      cfg.slots_per_rep = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::min(needed, 1e18)),
                                                   spec.slots_per_rep, spec.max_slots_per_rep);
    }
  }
  return cfg;
}

/// Runs every sweep point. Analytic rows are computed first; simulation
/// replications of all points share one worker pool and are reassembled in
/// sweep order.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                             unsigned workers = worker_count()) {
  spec.validate();
  const std::vector<SweepPoint> pts = sweep_points(spec);
  std::vector<ResultRow> rows;
  rows.reserve(pts.size());
  for (const auto& pt : pts) rows.push_back(analytic_row(spec, pt));
  if (!spec.run_sim) return rows;

  std::vector<SimConfig> configs;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    configs.push_back(point_sim_config(spec, pts[i], rows[i]));
    configs.back().validate();
  }
  const std::size_t reps = static_cast<std::size_t>(spec.replications);
  std::vector<ReplicationResult> results(pts.size() * reps);
  parallel_for(results.size(), workers, [&](std::size_t task) {
    const std::size_t point = task / reps;
    results[task] = run_replication(configs[point], task % reps, *configs[point].fer_override);
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<ReplicationResult> mine(results.begin() + i * reps, results.begin() + (i + 1) * reps);
    const SimResult r = aggregate(std::move(mine));
    rows[i].s_sim_mbps = r.throughput_mbps;
    rows[i].ci95 = r.ci95;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline const char* kCsvHeader =
    "mode,n,snr_db,z0_db,payload_bytes,p_e,tau,p_col,p_cap,p_eq,s_theory_mbps,s_sim_mbps,ci95,"
    "s_bianchi_mbps,s_max_mbps";

/// %.9g, with "inf" / "nan" spelled the same on every platform.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_csv_header(std::ostream& os) { os << kCsvHeader << '\n'; }

inline void write_csv_row(std::ostream& os, const ResultRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  os << to_string(r.mode) << ',' << r.n << ',' << format_number(r.snr_db) << ','
     << format_number(r.z0_db) << ',' << r.payload_bytes << ',' << format_number(r.p_e) << ','
     << format_number(r.tau) << ',' << format_number(r.p_col) << ',' << format_number(r.p_cap)
     << ',' << format_number(r.p_eq) << ',' << format_number(r.s_theory_mbps) << ','
     << opt(r.s_sim_mbps) << ',' << opt(r.ci95) << ',' << format_number(r.s_bianchi_mbps) << ','
     << format_number(r.s_max_mbps) << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  write_csv_header(os);
  for (const auto& r : rows) write_csv_row(os, r);
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

}  // namespace dcfcap
