#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace scneugm {

// Radio and MAC constants of the simulated Wi-Fi IIoT deployment.
// Powers are dBm, path losses positive dB, times carry their unit in the
// field name.
struct RadioConfig {
  double area_side = 100.0;          // meters
  int num_aps = 100;                 // perfect square, grid placement
  int num_stas = 100;                // K
  double slot_len = 500.0;           // RTWT slot, microseconds
  double bandwidth = 2.0e7;          // Hz
  double carrier = 5800.0;           // MHz
  double tx_power = 0.0;             // dBm
  double noise_floor = -96.0;        // dBm over the full bandwidth
  double sensitivity_floor = -95.0;  // dBm
  int packet_bits = 800;             // L
  double eps_max = 1e-5;             // MCS decode-error budget
  double reliability_target = 0.99;  // r-hat
  double backoff_slot = 9.0;         // microseconds
  int cw = 16;                       // contention window (counter in [0, cw))
  int max_retries = 4;
  std::vector<double> mcs_se_grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0,
                                     3.5, 4.0, 4.5, 5.0, 5.5, 6.0};

  // Max detectable path loss: tx_power - sensitivity_floor (95 dB default).
  double s_max() const { return tx_power - sensitivity_floor; }
  // STA-STA detect range: distance where path loss hits s_max.
  double detect_range_m() const;
  double slot_len_s() const { return slot_len * 1e-6; }
  double backoff_slot_s() const { return backoff_slot * 1e-6; }

  void validate() const;  // throws std::invalid_argument on a bad field

  static RadioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Log-distance path loss, positive dB:
//   s = 28*log10(distance + 1) + 20*log10(carrier_mhz) - 12
double path_loss_db(double distance_m, double carrier_mhz);

double dbm_to_mw(double dbm);
double db_to_linear(double db);

// Tail of the standard normal distribution.
double q_func(double x);

// Finite-blocklength decode error for an L-bit packet sent over duration_s
// at linear SNR snr (normal approximation with channel dispersion).
double decode_error(double snr, double duration_s, const RadioConfig& cfg);

struct McsSelection {
  double duration_s = 0.0;
  bool marginal = false;  // no SE met eps_max; smallest-SE duration returned
};

// Highest spectral efficiency whose interference-free decode error stays
// within eps_max. Throws when even the smallest SE does not fit in a slot.
McsSelection select_mcs(double assoc_loss_db, const RadioConfig& cfg);

}  // namespace scneugm
