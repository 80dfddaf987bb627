// Throughput against station count for both access modes, ideal channel,
// with and without capture.

#include <cstdio>

#include "dcfcap/dcfcap.hpp"

int main() {
  using namespace dcfcap;
  MacParams mac;
  CaptureParams none;
  CaptureParams cap;
  cap.z0 = db_to_linear(6.0);

  std::printf("%4s %10s %10s %10s %10s\n", "N", "2w", "2w z0=6", "4w", "4w z0=6");
  for (int n = 5; n <= 50; n += 5) {
    std::printf("%4d", n);
    for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay})
      for (const auto& cp : {none, cap})
        std::printf(" %10.4f", analyze(n, mac, mode, 0.0, cp, 1024).s_mbps);
    std::printf("\n");
  }
}
