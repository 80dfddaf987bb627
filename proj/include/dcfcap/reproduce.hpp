#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcfcap/dcf_analytic.hpp"
#include "dcfcap/dcf_sim.hpp"
#include "dcfcap/experiments.hpp"

namespace dcfcap {

inline constexpr std::array<std::string_view, 9> kReproduceTargets{
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "table2"};

inline bool is_reproduce_target(std::string_view t) {
  for (auto k : kReproduceTargets)
    if (k == t) return true;
  return false;
}

/// Command-line overrides applied on top of a target's config file.
struct RunOverrides {
  std::optional<int> replications;
  std::optional<std::int64_t> slots_per_rep;
  std::optional<std::uint64_t> seed;
  std::optional<bool> run_sim;

  void apply(ExperimentSpec& s) const {
    if (replications) s.replications = *replications;
    if (slots_per_rep) s.slots_per_rep = *slots_per_rep;
    if (seed) s.seed = *seed;
    if (run_sim) s.run_sim = *run_sim;
  }
};

// ---------------------------------------------------------------------------
// Aggregate throughput with stations split into per-station FER groups.

struct FerGroupRow {
  std::vector<double> fers;  ///< one FER per group, stations split evenly
  double reference_mbps = 0.0;
};

struct FerGroupStudy {
  SimConfig base;
  std::vector<FerGroupRow> rows;
};

struct FerGroupResult {
  FerGroupRow row;
  SimResult sim;
};

inline FerGroupStudy parse_fer_group_study(const json& doc) {
  detail::reject_unknown(doc,
                         {"name", "description", "kind", "mode", "n", "payload_bytes", "mac",
                          "capture", "replications", "slots_per_rep", "seed", "rows"},
                         "table2");
  FerGroupStudy study;
  SimConfig& c = study.base;
  c.cp.z0 = kInfinity;
  detail::read(doc, "n", c.n_stations);
  if (doc.contains("mode")) c.mode = parse_access_mode(doc.at("mode").get<std::string>());
  detail::read(doc, "payload_bytes", c.link.payload_bytes);
  if (doc.contains("mac")) detail::apply_mac(doc.at("mac"), c.mac);
  if (doc.contains("capture")) detail::apply_capture(doc.at("capture"), c.cp, c.capture_rule);
  detail::read(doc, "replications", c.replications);
  detail::read(doc, "slots_per_rep", c.slots_per_rep);
  detail::read(doc, "seed", c.seed);
  for (const auto& r : doc.at("rows")) {
    FerGroupRow row;
    row.fers = r.at("fer").get<std::vector<double>>();
    detail::read(r, "reference_mbps", row.reference_mbps);
    if (row.fers.empty() || c.n_stations % static_cast<int>(row.fers.size()) != 0)
      throw ConfigError("table2: stations must split evenly across FER groups");
    study.rows.push_back(std::move(row));
  }
  return study;
}

inline std::vector<std::pair<int, double>> even_groups(int n, const std::vector<double>& fers) {
  std::vector<std::pair<int, double>> groups;
  for (double f : fers) groups.emplace_back(n / static_cast<int>(fers.size()), f);
  return groups;
}

inline std::vector<FerGroupResult> run_fer_group_study(const FerGroupStudy& study,
                                                       unsigned workers = worker_count()) {
  std::vector<FerGroupResult> out;
  for (const auto& row : study.rows) {
    out.push_back({row, heterogeneous_fer_experiment(
                            study.base, even_groups(study.base.n_stations, row.fers), workers)});
  }
  return out;
}

inline void write_fer_group_csv(std::ostream& os, const std::vector<FerGroupResult>& results) {
  os << "fer_groups,s_sim_mbps,ci95,s_reference_mbps\n";
  for (const auto& r : results) {
    std::string label;
    for (std::size_t i = 0; i < r.row.fers.size(); ++i)
      label += (i ? ";" : "") + format_number(r.row.fers[i]);
    os << label << ',' << format_number(r.sim.throughput_mbps) << ','
       << format_number(r.sim.ci95) << ',' << format_number(r.row.reference_mbps) << '\n';
  }
}

// ---------------------------------------------------------------------------

/// Horizontal reference lines for the tau / P_eq figures.
inline void write_bianchi_reference_csv(std::ostream& os, const std::vector<ExperimentSpec>& specs) {
  os << "mode,n,tau_bianchi,p_bianchi\n";
  for (const auto& s : specs) {
    for (int n : s.n.empty() ? std::vector<int>{10} : s.n) {
      const ModelSolution b = bianchi_reference(n, s.mac, s.mode, 1024);
      os << to_string(s.mode) << ',' << n << ',' << format_number(b.tau) << ','
         << format_number(b.p_col) << '\n';
    }
  }
}

inline std::string default_config_dir() {
#ifdef DCFCAP_CONFIG_DIR
  return DCFCAP_CONFIG_DIR;
#else
  return "configs";
#endif
}

/// Writes results/<target>/... and returns the paths written.
inline std::vector<std::filesystem::path> reproduce(const std::string& target,
                                                    const std::filesystem::path& out_root,
                                                    const std::filesystem::path& config_dir,
                                                    const RunOverrides& overrides = {},
                                                    unsigned workers = worker_count()) {
  if (!is_reproduce_target(target)) throw ConfigError("unknown reproduce target '" + target + "'");
  const json doc = load_json_file((config_dir / (target + ".json")).string());
  const std::filesystem::path dir = out_root / target;
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  if (target == "table2") {
    FerGroupStudy study = parse_fer_group_study(doc);
    if (overrides.replications) study.base.replications = *overrides.replications;
    if (overrides.slots_per_rep) study.base.slots_per_rep = *overrides.slots_per_rep;
    if (overrides.seed) study.base.seed = *overrides.seed;
    const auto results = run_fer_group_study(study, workers);
    written.push_back(dir / "table2.csv");
    std::ofstream os(written.back());
    write_fer_group_csv(os, results);
    return written;
  }

  std::vector<ExperimentSpec> specs = parse_experiments(doc);
  for (auto& s : specs) overrides.apply(s);
  written.push_back(dir / (target + ".csv"));
  {
    std::ofstream os(written.back());
    write_csv_header(os);
    for (const auto& s : specs)
      for (const auto& row : run_experiment(s, workers)) write_csv_row(os, row);
  }
  if (target == "fig2" || target == "fig3") {
    written.push_back(dir / "bianchi_reference.csv");
    std::ofstream os(written.back());
    write_bianchi_reference_csv(os, specs);
  }
  return written;
}

}  // namespace dcfcap
