// Solve the model for 10 stations at 30 dB SNR with a 6 dB capture ratio and
// compare against a short simulation.

#include <cstdio>

#include "dcfcap/dcfcap.hpp"

int main() {
  using namespace dcfcap;

  LinkModel link;
  link.snr = db_to_linear(30.0);
  link.payload_bytes = 1024;

  CaptureParams cp;
  cp.z0 = db_to_linear(6.0);

  MacParams mac;
  const double pe = fer(link);
  const ModelSolution s = analyze(10, mac, AccessMode::TwoWay, pe, cp, link.payload_bytes);
  std::printf("P_e   %.6f\ntau   %.6f\nP_col %.6f\nP_cap %.6f\nS     %.4f Mbps\n", pe, s.tau, s.p_col,
              s.p_cap, s.s_mbps);

  SimConfig cfg;
  cfg.n_stations = 10;
  cfg.link = link;
  cfg.cp = cp;
  cfg.replications = 20;
  cfg.slots_per_rep = 200'000;
  const SimResult r = run(cfg);
  std::printf("sim   %.4f +- %.4f Mbps\n", r.throughput_mbps, r.ci95);
}
