#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcfcap/capture.hpp"
#include "dcfcap/error.hpp"
#include "dcfcap/mac_params.hpp"
#include "dcfcap/parallel.hpp"
#include "dcfcap/phy_link.hpp"
#include "dcfcap/rng.hpp"

namespace dcfcap {

enum class PendingMode { Idle, AwaitCts, AwaitAck };

/// How the AP picks a frame out of a collision.
///  Locked:    it synchronises on one colliding frame chosen uniformly and
///             decodes it iff that frame's SIR clears z0 g.
///  Strongest: the largest SIR above z0 g wins (resolve_collision).
enum class CaptureRule { Locked, Strongest };

inline CaptureRule parse_capture_rule(const std::string& text) {
  if (text == "locked") return CaptureRule::Locked;
  if (text == "strongest") return CaptureRule::Strongest;
  throw ConfigError("unknown capture rule '" + text + "'");
}

struct StationState {
  std::size_t id = 0;
  double position_r = 0.0;
  int stage = 0;
  std::int64_t counter = 0;
  PendingMode pending = PendingMode::Idle;
  double mean_power = 1.0;
  double p_e = 0.0;  ///< data frame error probability
};

struct SimConfig {
  int n_stations = 10;
  MacParams mac{};
  AccessMode mode = AccessMode::TwoWay;
  LinkModel link{};
  CaptureParams cp{};
  int replications = 100;
  std::int64_t slots_per_rep = 2'000'000;
  std::uint64_t seed = 1;
  double warmup_fraction = 0.05;
  CaptureRule capture_rule = CaptureRule::Locked;
  /// Uniform data-frame error probability; replaces fer(link) when set.
  std::optional<double> fer_override;
  /// Per-station data-frame error probability; replaces everything else when non-empty.
  std::vector<double> per_station_fer;

  void validate() const {
    if (n_stations < 1) throw ConfigError("n_stations must be >= 1");
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (slots_per_rep < 1) throw ConfigError("slots_per_rep must be >= 1");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
      throw ConfigError("warmup_fraction must be in [0,1)");
    if (!per_station_fer.empty() && per_station_fer.size() != static_cast<std::size_t>(n_stations))
      throw ConfigError("per_station_fer must have one entry per station");
    for (double p : per_station_fer)
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("per-station FER must be in [0,1]");
    if (fer_override && !(*fer_override >= 0.0 && *fer_override <= 1.0))
      throw ConfigError("fer_override must be in [0,1]");
    mac.validate();
    cp.validate();
    if (per_station_fer.empty() && !fer_override) link.validate();
  }
};

struct SimCounters {
  std::int64_t idle_slots = 0;
  std::int64_t successes = 0;
  std::int64_t collisions = 0;
  std::int64_t captures = 0;
  std::int64_t channel_errors = 0;
  std::int64_t attempts = 0;  ///< individual frames sent (RTS frames in 4-way)

  SimCounters& operator+=(const SimCounters& o) {
    idle_slots += o.idle_slots;
    successes += o.successes;
    collisions += o.collisions;
    captures += o.captures;
    channel_errors += o.channel_errors;
    attempts += o.attempts;
    return *this;
  }
};

struct ReplicationResult {
  double throughput_mbps = 0.0;
  double clock_us = 0.0;
  /// clock - (idle * sigma + successes T_s + collisions T_c + errors T_e)
  double time_balance_us = 0.0;
  SimCounters counters;
};

struct SimResult {
  double throughput_mbps = 0.0;
  double ci95 = 0.0;
  std::vector<ReplicationResult> per_rep;
  SimCounters counters;
};

struct SlotOutcome {
  enum class Kind { Idle, Success, Collision, ChannelError };
  Kind kind = Kind::Idle;
  std::optional<std::size_t> station;  ///< the station whose data frame was sent
  double duration = 0.0;
  bool captured = false;
  int transmitters = 0;
};

/// Everything step_slot needs besides the station states.
struct SlotContext {
  SlotDurations durations;
  MacParams mac;
  CaptureParams cp;
  CaptureRule rule = CaptureRule::Locked;
  AccessMode mode = AccessMode::TwoWay;
};

inline SlotContext make_slot_context(const SimConfig& cfg) {
  return {slot_durations(cfg.mac, cfg.mode, cfg.link.payload_bytes), cfg.mac, cfg.cp,
          cfg.capture_rule, cfg.mode};
}

/// Area-uniform placement on the disk of radius R around the AP (r = R sqrt(u)),
/// clamped to r_min.
inline std::vector<double> place_stations(int n, const CaptureParams& cp, Rng& rng) {
  if (n < 1) throw ContractViolation("place_stations: n must be >= 1");
  std::vector<double> r(n);
  for (auto& x : r) x = std::max(cp.r_min_m, cp.radius_m * std::sqrt(rng.uniform()));
  return r;
}

namespace detail {

inline void redraw(StationState& s, const MacParams& mac, Rng& rng, bool failed) {
  s.stage = failed ? std::min(s.stage + 1, mac.max_stage) : 0;
  s.counter = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(mac.window(s.stage))));
  s.pending = PendingMode::Idle;
}

}  // namespace detail

/// Advances the channel by one backoff slot or one busy period.
///
/// No counter at zero: idle slot, every counter drops by one. Otherwise the
/// stations at zero transmit (the RTS in 4-way). Two or more transmitters
/// collide unless one frame is captured. A lone or capturing transmitter
/// then sends its data frame, which is lost with its p_e. Counters of the
/// other stations stay frozen during the busy period.
inline SlotOutcome step_slot(std::span<StationState> stations, const SlotContext& ctx, Rng& rng) {
  SlotOutcome out;
  std::vector<std::size_t> tx;
  for (std::size_t j = 0; j < stations.size(); ++j)
    if (stations[j].counter == 0) tx.push_back(j);

  if (tx.empty()) {
    for (auto& s : stations) --s.counter;
    out.duration = ctx.durations.sigma;
    return out;
  }

  out.transmitters = static_cast<int>(tx.size());
  const PendingMode waiting =
      ctx.mode == AccessMode::FourWay ? PendingMode::AwaitCts : PendingMode::AwaitAck;
  for (std::size_t j : tx) stations[j].pending = waiting;

  std::optional<std::size_t> winner;
  if (tx.size() == 1) {
    winner = tx.front();
  } else if (ctx.cp.capture_enabled()) {
    CollisionDraw draw;
    draw.powers.reserve(tx.size());
    for (std::size_t j : tx) {
      const double p0 = stations[j].mean_power;
      draw.powers.push_back(-p0 * std::log1p(-rng.uniform_open()));
    }
    draw.station_ids = tx;
    if (ctx.rule == CaptureRule::Locked)
      winner = resolve_collision_locked(draw, ctx.cp, rng.below(tx.size()));
    else
      winner = resolve_collision(draw, ctx.cp);
    out.captured = winner.has_value();
  }

  if (!winner) {
    out.kind = SlotOutcome::Kind::Collision;
    out.duration = ctx.durations.t_c;
    for (std::size_t j : tx) detail::redraw(stations[j], ctx.mac, rng, true);
    return out;
  }

  StationState& w = stations[*winner];
  w.pending = PendingMode::AwaitAck;
  const bool corrupted = rng.bernoulli(w.p_e);
  out.station = *winner;
  out.kind = corrupted ? SlotOutcome::Kind::ChannelError : SlotOutcome::Kind::Success;
  out.duration = corrupted ? ctx.durations.t_e : ctx.durations.t_s;
  for (std::size_t j : tx) detail::redraw(stations[j], ctx.mac, rng, j != *winner || corrupted);
  return out;
}

inline void record(const SlotOutcome& o, SimCounters& c) {
  using K = SlotOutcome::Kind;
  c.attempts += o.transmitters;
  switch (o.kind) {
    case K::Idle: ++c.idle_slots; break;
    case K::Success: ++c.successes; break;
    case K::Collision: ++c.collisions; break;
    case K::ChannelError: ++c.channel_errors; break;
  }
  if (o.captured) ++c.captures;
}

/// Initial station states for one replication: fresh placement, stage 0.
inline std::vector<StationState> init_stations(const SimConfig& cfg, double link_fer, Rng& rng) {
  const std::vector<double> r = place_stations(cfg.n_stations, cfg.cp, rng);
  std::vector<StationState> st(cfg.n_stations);
  for (int j = 0; j < cfg.n_stations; ++j) {
    st[j].id = j;
    st[j].position_r = r[j];
    st[j].mean_power = mean_power(r[j], cfg.cp);
    st[j].p_e = cfg.per_station_fer.empty() ? link_fer : cfg.per_station_fer[j];
    st[j].counter = static_cast<std::int64_t>(rng.below(cfg.mac.window(0)));
  }
  return st;
}

/// Data-frame error probability shared by all stations of a config.
inline double config_fer(const SimConfig& cfg) {
  if (!cfg.per_station_fer.empty()) return 0.0;
  if (cfg.fer_override) return *cfg.fer_override;
  return fer(cfg.link);
}

/// One replication. Runs of idle slots are skipped in bulk; this consumes no
/// randomness, so the trajectory equals repeated step_slot calls.
inline ReplicationResult run_replication(const SimConfig& cfg, std::uint64_t rep_index,
                                         double link_fer) {
  Rng rng = Rng::substream(cfg.seed, rep_index);
  std::vector<StationState> st = init_stations(cfg, link_fer, rng);
  const SlotContext ctx = make_slot_context(cfg);
  const SlotDurations& sd = ctx.durations;

  const std::int64_t total = cfg.slots_per_rep;
  const auto warmup = static_cast<std::int64_t>(cfg.warmup_fraction * static_cast<double>(total));
  std::int64_t slot = 0;
  bool measuring = warmup == 0;
  SimCounters c;
  double clock = 0.0;

  while (slot < total) {
    std::int64_t idle = std::numeric_limits<std::int64_t>::max();
    for (const auto& s : st) idle = std::min(idle, s.counter);
    if (idle > 0) {
      const std::int64_t boundary = measuring ? total : warmup;
      idle = std::min(idle, boundary - slot);
      for (auto& s : st) s.counter -= idle;
      c.idle_slots += idle;
      clock += static_cast<double>(idle) * sd.sigma;
      slot += idle;
    } else {
      const SlotOutcome o = step_slot(st, ctx, rng);
      record(o, c);
      clock += o.duration;
      ++slot;
    }
    if (!measuring && slot >= warmup) {
      measuring = true;
      c = {};
      clock = 0.0;
    }
  }

  ReplicationResult r;
  r.counters = c;
  r.clock_us = clock;
  r.time_balance_us = clock - (static_cast<double>(c.idle_slots) * sd.sigma +
                               static_cast<double>(c.successes) * sd.t_s +
                               static_cast<double>(c.collisions) * sd.t_c +
                               static_cast<double>(c.channel_errors) * sd.t_e);
  r.throughput_mbps = clock > 0.0 ? static_cast<double>(c.successes) * sd.e_pl / clock : 0.0;
  return r;
}

/// Mean and normal-approximation 95% half-width, summed in index order.
inline SimResult aggregate(std::vector<ReplicationResult> reps) {
  SimResult out;
  const double n = static_cast<double>(reps.size());
  double sum = 0.0;
  for (const auto& r : reps) {
    sum += r.throughput_mbps;
    out.counters += r.counters;
  }
  out.throughput_mbps = sum / n;
  if (reps.size() > 1) {
    double ss = 0.0;
    for (const auto& r : reps) ss += (r.throughput_mbps - out.throughput_mbps) * (r.throughput_mbps - out.throughput_mbps);
    out.ci95 = 1.96 * std::sqrt(ss / (n - 1.0) / n);
  }
  out.per_rep = std::move(reps);
  return out;
}

inline SimResult run(const SimConfig& cfg, unsigned workers = worker_count()) {
  cfg.validate();
  const double link_fer = config_fer(cfg);
  std::vector<ReplicationResult> reps(cfg.replications);
  parallel_for(reps.size(), workers,
               [&](std::size_t i) { reps[i] = run_replication(cfg, i, link_fer); });
  return aggregate(std::move(reps));
}

/// Groups of (station count, FER); stations take the FERs in group order.
inline SimResult heterogeneous_fer_experiment(SimConfig cfg,
                                              const std::vector<std::pair<int, double>>& groups,
                                              unsigned workers = worker_count()) {
  std::vector<double> fers;
  for (const auto& [count, p] : groups) {
    if (count < 0) throw ConfigError("group size must be >= 0");
    fers.insert(fers.end(), count, p);
  }
  if (fers.size() != static_cast<std::size_t>(cfg.n_stations))
    throw ConfigError("FER group sizes sum to " + std::to_string(fers.size()) + ", expected " +
                      std::to_string(cfg.n_stations));
  cfg.per_station_fer = std::move(fers);
  return run(cfg, workers);
}

}  // namespace dcfcap
