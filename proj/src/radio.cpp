#include "scneugm/radio.hpp"

#include <cmath>
#include <stdexcept>

namespace scneugm {

double path_loss_db(double distance_m, double carrier_mhz) {
  return 28.0 * std::log10(distance_m + 1.0) + 20.0 * std::log10(carrier_mhz) -
         12.0;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double RadioConfig::detect_range_m() const {
  // invert path_loss_db(l, carrier) == s_max
  const double exponent =
      (s_max() + 12.0 - 20.0 * std::log10(carrier)) / 28.0;
  return std::pow(10.0, exponent) - 1.0;
}

void RadioConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("RadioConfig: " + msg);
  };
  if (!(area_side > 0)) fail("area_side must be positive");
  if (num_stas < 1) fail("num_stas must be >= 1");
  if (num_aps < 1) fail("num_aps must be >= 1");
  const int g = static_cast<int>(std::lround(std::sqrt(double(num_aps))));
  if (g * g != num_aps) fail("num_aps must be a perfect square");
  if (!(slot_len > 0)) fail("slot_len must be positive");
  if (!(bandwidth > 0)) fail("bandwidth must be positive");
  if (!(carrier > 0)) fail("carrier must be positive");
  if (!std::isfinite(tx_power) || !std::isfinite(noise_floor) ||
      !std::isfinite(sensitivity_floor))
    fail("powers must be finite");
  if (packet_bits < 1) fail("packet_bits must be >= 1");
  if (!(eps_max > 0 && eps_max < 1)) fail("eps_max must be in (0,1)");
  if (!(reliability_target > 0 && reliability_target <= 1))
    fail("reliability_target must be in (0,1]");
  if (!(backoff_slot > 0)) fail("backoff_slot must be positive");
  if (cw < 1) fail("cw must be >= 1");
  if (max_retries < 0) fail("max_retries must be >= 0");
  if (mcs_se_grid.empty()) fail("mcs_se_grid must be nonempty");
  double prev = 0.0;
  for (double se : mcs_se_grid) {
    if (!(se > prev)) fail("mcs_se_grid must be strictly increasing and positive");
    prev = se;
  }
}

RadioConfig RadioConfig::from_json(const nlohmann::json& j) {
  RadioConfig c;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("area_side", c.area_side);
  get("num_aps", c.num_aps);
  get("num_stas", c.num_stas);
  get("slot_len", c.slot_len);
  get("bandwidth", c.bandwidth);
  get("carrier", c.carrier);
  get("tx_power", c.tx_power);
  get("noise_floor", c.noise_floor);
  get("sensitivity_floor", c.sensitivity_floor);
  get("packet_bits", c.packet_bits);
  get("eps_max", c.eps_max);
  get("reliability_target", c.reliability_target);
  get("backoff_slot", c.backoff_slot);
  get("cw", c.cw);
  get("max_retries", c.max_retries);
  get("mcs_se_grid", c.mcs_se_grid);
  c.validate();
  return c;
}

nlohmann::json RadioConfig::to_json() const {
  return nlohmann::json{{"area_side", area_side},
                        {"num_aps", num_aps},
                        {"num_stas", num_stas},
                        {"slot_len", slot_len},
                        {"bandwidth", bandwidth},
                        {"carrier", carrier},
                        {"tx_power", tx_power},
                        {"noise_floor", noise_floor},
                        {"sensitivity_floor", sensitivity_floor},
                        {"packet_bits", packet_bits},
                        {"eps_max", eps_max},
                        {"reliability_target", reliability_target},
                        {"backoff_slot", backoff_slot},
                        {"cw", cw},
                        {"max_retries", max_retries},
                        {"mcs_se_grid", mcs_se_grid}};
}

double decode_error(double snr, double duration_s, const RadioConfig& cfg) {
  const double n = duration_s * cfg.bandwidth;  // blocklength in symbols
  const double one_plus = 1.0 + snr;
  const double dispersion = 1.0 - 1.0 / (one_plus * one_plus);
  const double num =
      -double(cfg.packet_bits) * M_LN2 + n * std::log(one_plus);
  const double den = std::sqrt(n * dispersion);
  return q_func(num / den);
}

McsSelection select_mcs(double assoc_loss_db, const RadioConfig& cfg) {
  const double snr =
      db_to_linear(cfg.tx_power - assoc_loss_db - cfg.noise_floor);
  for (auto it = cfg.mcs_se_grid.rbegin(); it != cfg.mcs_se_grid.rend(); ++it) {
    const double d = double(cfg.packet_bits) / (cfg.bandwidth * *it);
    if (decode_error(snr, d, cfg) <= cfg.eps_max) return {d, false};
  }
  const double d_slowest =
      double(cfg.packet_bits) / (cfg.bandwidth * cfg.mcs_se_grid.front());
  if (d_slowest > cfg.slot_len_s())
    throw std::runtime_error(
        "no feasible MCS: slowest packet duration exceeds the slot length");
  return {d_slowest, true};
}

}  // namespace scneugm
