#pragma once

#include <cstdint>
#include <string>

#include "dcfcap/error.hpp"

namespace dcfcap {

enum class AccessMode { TwoWay, FourWay };

inline std::string to_string(AccessMode mode) {
  return mode == AccessMode::TwoWay ? "2way" : "4way";
}

inline AccessMode parse_access_mode(const std::string& text) {
  if (text == "2way" || text == "two_way" || text == "basic" || text == "2W") return AccessMode::TwoWay;
  if (text == "4way" || text == "four_way" || text == "rts_cts" || text == "4W") return AccessMode::FourWay;
  throw ConfigError("unknown access mode '" + text + "'");
}

/// 802.11b DCF timing and frame sizes (defaults: 1 Mbps DSSS). Durations in
/// microseconds, rates in bits per microsecond (= Mbps).
struct MacParams {
  int w_min = 32;
  int max_stage = 5;
  double slot_sigma = 20.0;
  double sifs = 10.0;
  double difs = 50.0;
  double eifs = 300.0;  // folded into the timeouts; kept for reference
  double prop_delay = 1.0;
  std::int64_t ack_bytes = 14;
  std::int64_t rts_bytes = 20;
  std::int64_t cts_bytes = 14;
  std::int64_t mac_header_bytes = 24;
  std::int64_t phy_header_bytes = 16;
  double ack_timeout = 300.0;
  double cts_timeout = 300.0;
  double data_rate = 1.0;
  double ctrl_rate = 1.0;
  /// RTS/CTS/ACK airtime includes the PHY header.
  bool ctrl_frames_carry_phy_header = true;

  /// Contention window at backoff stage i.
  std::int64_t window(int stage) const { return static_cast<std::int64_t>(w_min) << stage; }

  void validate() const {
    if (w_min < 1) throw ConfigError("w_min must be >= 1");
    if (max_stage < 0 || max_stage > 20) throw ConfigError("max_stage must be in [0, 20]");
    if (!(slot_sigma > 0) || !(sifs > 0) || !(difs > 0) || !(prop_delay >= 0) ||
        !(ack_timeout > 0) || !(cts_timeout > 0))
      throw ConfigError("MAC durations must be > 0");
    if (!(data_rate > 0) || !(ctrl_rate > 0)) throw ConfigError("rates must be > 0");
    if (ack_bytes < 1 || rts_bytes < 1 || cts_bytes < 1 || mac_header_bytes < 0 ||
        phy_header_bytes < 0)
      throw ConfigError("frame sizes must be positive");
  }
};

/// Channel-busy durations of the three non-idle slot kinds (microseconds)
/// plus the payload size in bits.
struct SlotDurations {
  double t_s = 0.0;
  double t_c = 0.0;
  double t_e = 0.0;
  double sigma = 0.0;
  double e_pl = 0.0;
};

inline SlotDurations slot_durations(const MacParams& mac, AccessMode mode,
                                    std::int64_t payload_bytes) {
  mac.validate();
  if (payload_bytes < 0) throw ConfigError("payload_bytes must be >= 0");

  const double phy = 8.0 * mac.phy_header_bytes / mac.ctrl_rate;
  const double ctrl_phy = mac.ctrl_frames_carry_phy_header ? phy : 0.0;
  auto ctrl = [&](std::int64_t bytes) { return 8.0 * bytes / mac.ctrl_rate + ctrl_phy; };

  const double header = phy + 8.0 * mac.mac_header_bytes / mac.data_rate;
  const double payload = 8.0 * payload_bytes / mac.data_rate;
  const double ack = ctrl(mac.ack_bytes);
  const double rts = ctrl(mac.rts_bytes);
  const double cts = ctrl(mac.cts_bytes);
  const double tp = mac.prop_delay;

  SlotDurations sd;
  sd.sigma = mac.slot_sigma;
  sd.e_pl = 8.0 * payload_bytes;
  if (mode == AccessMode::FourWay) {
    const double handshake = rts + mac.sifs + tp + cts + mac.sifs + tp;
    sd.t_c = rts + mac.cts_timeout;
    sd.t_e = handshake + header + payload + mac.ack_timeout;
    sd.t_s = handshake + header + payload + mac.sifs + tp + ack + mac.difs + tp;
  } else {
    sd.t_c = header + payload + mac.ack_timeout;
    sd.t_e = header + payload + mac.ack_timeout;
    sd.t_s = header + payload + mac.sifs + tp + ack + mac.difs + tp;
  }
  return sd;
}

}  // namespace dcfcap
