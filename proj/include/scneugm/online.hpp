#pragma once

#include <array>
#include <deque>
#include <vector>

#include "scneugm/es.hpp"

namespace scneugm {

enum class PairMode { Bucketed, AllPairs };

// How a round's duration is charged as virtual time between rounds:
// measured wall clock, a deterministic pair-count cost proxy, or a fixed dt.
enum class TimeModel { Measured, PairProxy, Fixed };

struct OnlineConfig {
  int rounds = 10;
  int history_window = 20;  // I; 0 disables augmentation entirely
  int psi = 7;
  int upsilon = 20;
  PairMode mode = PairMode::Bucketed;
  bool augment = true;
  bool mobility = false;
  double speed_min = 0.0;
  double speed_max = 5.0;
  int periods_per_round = 50;
  TimeModel time_model = TimeModel::Measured;
  double fixed_dt_ms = 50.0;
  double proxy_pair_us = 5.0;  // per processed ordered pair
  double proxy_sta_us = 30.0;  // per STA (embedding + hashing)
  double proxy_base_ms = 1.0;

  double round_duration_ms(double measured_tau_ms, long pair_count,
                           int num_stas) const {
    switch (time_model) {
      case TimeModel::Fixed: return fixed_dt_ms;
      case TimeModel::PairProxy:
        return proxy_base_ms + 1e-3 * (proxy_pair_us * double(pair_count) +
                                       proxy_sta_us * double(num_stas));
      case TimeModel::Measured: break;
    }
    return measured_tau_ms;
  }
};

// Phases: Emb, Hsh, Buc, Pre, EG, Col.
enum : int { kPhEmb = 0, kPhHsh, kPhBuc, kPhPre, kPhEG, kPhCol, kNumPhases };

struct RoundRecord {
  int round = 0;
  long pair_count = 0;
  int z_used = 0;
  int violations = 0;     // window transmitted with this round's assignment
  double loss_rate = 0.0; // same window
  double tau_ms = 0.0;
  std::array<double, kNumPhases> phase_ms{};
};

// NGM state carried between rounds: current network plus the edge sets of
// the last <= history_window rounds.
struct OnlineState {
  Network net;
  std::deque<std::vector<std::pair<int, int>>> history;
  std::vector<double> speeds;
  std::vector<double> headings;
};

struct RoundOutput {
  SlotAssignment assignment;
  std::vector<std::pair<int, int>> edges;  // directed pairs with edge 1
  RoundRecord record;
};

// One measure -> embed -> hash -> bucket -> augment -> predict -> edge ->
// color pass over the current network. Appends this round's edges to the
// state history.
RoundOutput run_round(OnlineState& state, const RadioConfig& cfg,
                      const NgmModels& models, const OnlineConfig& ocfg,
                      uint64_t seed, int round);

struct OnlineResult {
  std::vector<RoundRecord> rounds;
  double mean_slots = 0.0;
  double packet_loss_rate = 0.0;  // 1 - mean reliability over all windows
  double mean_tau_ms = 0.0;
  SlotAssignment last_assignment;
  ReliabilityReport last_report;
};

// Repeated rounds over one generated network. After each round the STAs
// advance by the round duration (mobility on), then a transmission window
// runs with the fresh assignment.
OnlineResult run_online(const RadioConfig& cfg, const NgmModels& models,
                        const OnlineConfig& ocfg, uint64_t seed);

struct SlotHistogramRow {
  int slot;
  int sta_count;
  int violations;
};

std::vector<SlotHistogramRow> per_slot_histogram(const SlotAssignment& assign,
                                                 const ReliabilityReport& report,
                                                 double r_hat);

}  // namespace scneugm
