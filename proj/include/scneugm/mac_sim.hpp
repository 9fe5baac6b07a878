#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scneugm/network.hpp"

namespace scneugm {

// Periodic RTWT slot choice per STA, slots 1..num_slots.
struct SlotAssignment {
  std::vector<int> slot_of;
  int num_slots = 1;
};

struct ReliabilityReport {
  std::vector<double> reliability;  // successes / periods
  std::vector<int> successes;
  int periods = 0;

  double mean_reliability() const;
  int violations(double r_hat) const;  // #STAs with reliability < r_hat
};

// Monte-Carlo slotted CSMA/CA over `periods` RTWT periods.
//
// Within a slot every member draws a backoff counter in [0, cw) backoff
// slots; the countdown freezes while any STA inside detect range transmits.
// A countdown hitting zero starts a transmission of the STA's packet
// duration, skipped outright when it would cross the slot boundary. Each
// attempt succeeds with probability 1 - decode_error at the SINR sampled at
// transmission start (noise plus the received powers of concurrently
// transmitting co-slot STAs at the receiving AP); failures retry up to
// max_retries inside the slot. Skips do not consume retries.
//
// Periods use derived RNG streams keyed by (seed, period), and per-period
// results reduce by integer summation, so parallel and serial runs match
// bit for bit.
ReliabilityReport simulate_periods(const Network& net, const RadioConfig& cfg,
                                   const SlotAssignment& assignment,
                                   int periods, uint64_t seed);

// Same, with only `active` STAs transmitting (slot_of is parallel to
// `active`); everyone else stays silent. The report covers active STAs.
ReliabilityReport simulate_periods_active(const Network& net,
                                          const RadioConfig& cfg,
                                          const std::vector<int>& active,
                                          const SlotAssignment& assignment,
                                          int periods, uint64_t seed);

void write_reliability_csv(const ReliabilityReport& report,
                           const std::filesystem::path& path,
                           const std::string& comment);

}  // namespace scneugm
