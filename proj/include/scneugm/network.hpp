#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scneugm/radio.hpp"

namespace scneugm {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// A generated deployment: AP grid, STA drops, and every quantity derived
// from positions. Immutable after construction; share freely across threads.
struct Network {
  std::vector<Point> ap_positions;        // A entries, row-major grid
  std::vector<Point> sta_positions;       // K entries
  std::vector<double> pathloss_sta_ap;    // K x A, dB, row-major
  std::vector<int> assoc_ap;              // argmin-loss AP per STA
  std::vector<double> packet_duration_s;  // per STA
  std::vector<uint8_t> marginal;          // per STA, MCS floor did not meet eps_max

  int num_stas() const { return static_cast<int>(sta_positions.size()); }
  int num_aps() const { return static_cast<int>(ap_positions.size()); }
  double loss(int sta, int ap) const {
    return pathloss_sta_ap[static_cast<size_t>(sta) * ap_positions.size() + ap];
  }
  double assoc_loss(int sta) const { return loss(sta, assoc_ap[sta]); }
};

// One STA's detectable APs: (path loss dB, ap x, ap y), ascending by loss,
// truncated at s_max. The first entry is the associated AP.
struct StationState {
  struct Entry {
    double loss_db;
    double ap_x;
    double ap_y;
  };
  std::vector<Entry> entries;
};

// Ground-truth contending / hidden indicators (training-side only).
struct PairIndicators {
  int k = 0;
  std::vector<uint8_t> contending;  // K x K, zero diagonal
  std::vector<uint8_t> hidden;      // K x K, zero diagonal

  uint8_t c(int i, int j) const { return contending[size_t(i) * k + j]; }
  uint8_t h(int i, int j) const { return hidden[size_t(i) * k + j]; }
  // 1 when the ordered pair interacts at all (indicators are exclusive)
  uint8_t either(int i, int j) const { return c(i, j) | h(i, j); }
};

// Drops K STAs uniformly in the area over the AP grid. Any STA without a
// detectable AP is re-drawn (bounded), so station states are never empty.
Network generate_network(const RadioConfig& cfg, uint64_t seed);

// Recomputes losses, associations and packet durations for given positions.
Network network_from_positions(const RadioConfig& cfg,
                               std::vector<Point> sta_positions);

std::vector<StationState> measure_states(const Network& net,
                                         const RadioConfig& cfg);

PairIndicators pair_indicators(const Network& net, const RadioConfig& cfg);

// Advances STAs along their headings for dt seconds. A STA hitting the
// boundary is clamped onto it and its heading (in/out parameter) is re-drawn
// to point back inside. Derived quantities are recomputed.
Network move_stations(const Network& net, const RadioConfig& cfg, double dt_s,
                      const std::vector<double>& speeds_mps,
                      std::vector<double>& headings_rad, uint64_t seed);

void write_pair_indicators_csv(const PairIndicators& ind,
                               const std::filesystem::path& path,
                               const std::string& comment);

}  // namespace scneugm
