#include <cmath>

#include "doctest.h"
#include "scneugm/radio.hpp"

using namespace scneugm;

namespace {

// independent bisection root-finder used as the detect-range oracle
double bisect(double lo, double hi, double (*f)(double), double target) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double loss_at_5800(double l) { return path_loss_db(l, 5800.0); }

}  // namespace

TEST_CASE("path loss at zero distance matches direct evaluation") {
  // 20*log10(5800) - 12, frozen from the closed form
  CHECK(path_loss_db(0.0, 5800.0) == doctest::Approx(63.2685598729).epsilon(1e-9));
}

TEST_CASE("path loss gains 28 dB per decade of (distance + 1)") {
  CHECK(path_loss_db(9.0, 5800.0) ==
        doctest::Approx(path_loss_db(0.0, 5800.0) + 28.0).epsilon(1e-12));
  CHECK(path_loss_db(99.0, 5800.0) ==
        doctest::Approx(path_loss_db(0.0, 5800.0) + 56.0).epsilon(1e-12));
}

TEST_CASE("detect range solves loss == 95 dB (bisection oracle)") {
  const double root = bisect(0.0, 100.0, loss_at_5800, 95.0);
  CHECK(root == doctest::Approx(12.5893).epsilon(1e-3));
  RadioConfig cfg;
  CHECK(cfg.detect_range_m() == doctest::Approx(root).epsilon(1e-9));
  CHECK(path_loss_db(cfg.detect_range_m(), cfg.carrier) ==
        doctest::Approx(cfg.s_max()).epsilon(1e-9));
}

TEST_CASE("decode error at phi=10, d=20us is vanishing") {
  RadioConfig cfg;
  // Q-function argument computed independently
  const double n = 20e-6 * cfg.bandwidth;
  const double v = 1.0 - 1.0 / (11.0 * 11.0);
  const double arg =
      (-800.0 * std::log(2.0) + n * std::log(11.0)) / std::sqrt(n * v);
  CHECK(arg == doctest::Approx(20.3).epsilon(1e-2));
  CHECK(decode_error(10.0, 20e-6, cfg) < 1e-12);
}

TEST_CASE("decode error is 1/2 when the rate meets capacity exactly") {
  RadioConfig cfg;
  const double phi = 3.0;
  const double d = double(cfg.packet_bits) * std::log(2.0) /
                   (cfg.bandwidth * std::log(1.0 + phi));
  CHECK(decode_error(phi, d, cfg) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("decode error decreases in duration and in snr") {
  RadioConfig cfg;
  for (int phi = 1; phi <= 100; phi += 9) {
    const double d0 = double(cfg.packet_bits) * std::log(2.0) /
                      (cfg.bandwidth * std::log(1.0 + phi));
    double prev = 1.1;
    for (double mult = 1.0; mult <= 10.0; mult += 0.5) {
      const double eps = decode_error(double(phi), d0 * mult, cfg);
      CHECK(eps <= prev);
      CHECK(eps >= 0.0);
      CHECK(eps <= 1.0);
      prev = eps;
    }
  }
  // monotone in snr at fixed duration (strict until double underflow)
  double prev = 1.1;
  for (double phi = 1.0; phi <= 100.0; phi += 1.0) {
    const double eps = decode_error(phi, 40e-6, cfg);
    if (prev > 0.0)
      CHECK(eps < prev);
    else
      CHECK(eps == 0.0);
    prev = eps;
  }
}

TEST_CASE("mcs boundary at phi=10 sits between 259 and 260 symbols") {
  // root of Q-arg == Q^-1(1e-5), checked from both sides
  RadioConfig cfg;
  CHECK(decode_error(10.0, 260.0 / cfg.bandwidth, cfg) <= cfg.eps_max);
  CHECK(decode_error(10.0, 259.0 / cfg.bandwidth, cfg) > cfg.eps_max);
}

TEST_CASE("select_mcs picks the fastest feasible rate") {
  RadioConfig cfg;
  // enormous snr -> best spectral efficiency
  const double tiny_loss = 1.0;  // phi = 95 dB
  const McsSelection best = select_mcs(tiny_loss, cfg);
  CHECK(best.duration_s ==
        doctest::Approx(double(cfg.packet_bits) /
                        (cfg.bandwidth * cfg.mcs_se_grid.back())));
  CHECK_FALSE(best.marginal);

  // equal losses give equal durations
  const McsSelection a = select_mcs(88.0, cfg);
  const McsSelection b = select_mcs(88.0, cfg);
  CHECK(a.duration_s == b.duration_s);

  // the selected duration always meets the error budget
  for (double loss = 60.0; loss <= 94.0; loss += 1.0) {
    const McsSelection sel = select_mcs(loss, cfg);
    const double phi = db_to_linear(cfg.tx_power - loss - cfg.noise_floor);
    if (!sel.marginal)
      CHECK(decode_error(phi, sel.duration_s, cfg) <= cfg.eps_max);
    CHECK(sel.duration_s <= cfg.slot_len_s());
  }
}

TEST_CASE("select_mcs flags marginal links and rejects impossible slots") {
  RadioConfig cfg;
  // phi = -3 dB: even SE=0.5 misses the 1e-5 budget (oracle check below)
  const double weak_loss = 99.0;
  const double weak_phi = db_to_linear(cfg.tx_power - weak_loss - cfg.noise_floor);
  REQUIRE(decode_error(weak_phi,
                       double(cfg.packet_bits) /
                           (cfg.bandwidth * cfg.mcs_se_grid.front()),
                       cfg) > cfg.eps_max);
  const McsSelection weak = select_mcs(weak_loss, cfg);
  CHECK(weak.marginal);
  CHECK(weak.duration_s ==
        doctest::Approx(double(cfg.packet_bits) /
                        (cfg.bandwidth * cfg.mcs_se_grid.front())));

  RadioConfig tight = cfg;
  tight.slot_len = 10.0;  // 10 us slot cannot hold an 80 us packet
  CHECK_THROWS_AS(select_mcs(weak_loss, tight), std::runtime_error);
}

TEST_CASE("radio config json round trip keeps exact field names") {
  RadioConfig cfg;
  cfg.num_stas = 42;
  const nlohmann::json j = cfg.to_json();
  for (const char* key :
       {"area_side", "num_aps", "num_stas", "slot_len", "bandwidth", "carrier",
        "tx_power", "noise_floor", "sensitivity_floor", "packet_bits",
        "eps_max", "reliability_target", "backoff_slot", "cw", "max_retries",
        "mcs_se_grid"})
    CHECK(j.contains(key));
  const RadioConfig back = RadioConfig::from_json(j);
  CHECK(back.num_stas == 42);
  CHECK(back.slot_len == cfg.slot_len);
}

TEST_CASE("radio config validation rejects bad fields") {
  RadioConfig cfg;
  cfg.num_aps = 99;  // not a perfect square
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RadioConfig{};
  cfg.mcs_se_grid = {1.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
