#include "scneugm/mac_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "scneugm/rng.hpp"
#include "scneugm/util.hpp"

namespace scneugm {

namespace {

constexpr double kTimeEps = 1e-12;  // seconds; guards float comparisons

enum class StaPhase { Counting, Transmitting, Done };

// Per-slot static context, shared by every period.
struct SlotContext {
  std::vector<int> members;              // positions into `active`
  std::vector<double> duration_s;        // per member
  std::vector<double> signal_mw;         // per member, at own AP
  std::vector<double> noise_mw;          // scalar, repeated for convenience
  std::vector<uint8_t> senses;           // n x n, mutual carrier sensing
  std::vector<double> interference_mw;   // n x n, j's rx power at i's AP
};

struct StaRun {
  StaPhase phase = StaPhase::Counting;
  double backoff_left_s = 0.0;
  double tx_end_s = 0.0;
  bool tx_ok = false;
  int attempts = 0;
  bool success = false;
};

void run_slot(const SlotContext& ctx, const RadioConfig& cfg, Rng& backoff_rng,
              Rng& decode_rng, std::vector<uint8_t>& success_out) {
  const int n = static_cast<int>(ctx.members.size());
  const double slot_end = cfg.slot_len_s();
  std::vector<StaRun> runs(n);
  for (int i = 0; i < n; ++i)
    runs[i].backoff_left_s =
        double(backoff_rng.below(cfg.cw)) * cfg.backoff_slot_s();

  std::vector<uint8_t> frozen(n, 0);
  auto refreeze = [&] {
    for (int i = 0; i < n; ++i) {
      if (runs[i].phase != StaPhase::Counting) continue;
      uint8_t f = 0;
      for (int j = 0; j < n && !f; ++j)
        if (runs[j].phase == StaPhase::Transmitting &&
            ctx.senses[size_t(i) * n + j])
          f = 1;
      frozen[i] = f;
    }
  };

  double now = 0.0;
  std::vector<int> starters;
  while (true) {
    refreeze();
    double next = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (runs[i].phase == StaPhase::Transmitting)
        next = std::min(next, runs[i].tx_end_s);
      else if (runs[i].phase == StaPhase::Counting && !frozen[i])
        next = std::min(next, now + runs[i].backoff_left_s);
    }
    if (!std::isfinite(next)) break;        // all done
    if (next > slot_end + kTimeEps) break;  // nothing else fits this slot

    const double dt = next - now;
    for (int i = 0; i < n; ++i)
      if (runs[i].phase == StaPhase::Counting && !frozen[i])
        runs[i].backoff_left_s = std::max(0.0, runs[i].backoff_left_s - dt);
    now = next;

    // transmission ends first, then new starts at the same instant
    for (int i = 0; i < n; ++i) {
      auto& r = runs[i];
      if (r.phase != StaPhase::Transmitting || r.tx_end_s > now + kTimeEps)
        continue;
      if (r.tx_ok) {
        r.phase = StaPhase::Done;
        r.success = true;
      } else if (r.attempts > cfg.max_retries) {
        r.phase = StaPhase::Done;
      } else {
        r.phase = StaPhase::Counting;
        r.backoff_left_s =
            double(backoff_rng.below(cfg.cw)) * cfg.backoff_slot_s();
      }
    }
    refreeze();

    starters.clear();
    for (int i = 0; i < n; ++i)
      if (runs[i].phase == StaPhase::Counting && !frozen[i] &&
          runs[i].backoff_left_s <= kTimeEps)
        starters.push_back(i);
    if (starters.empty()) continue;

    // boundary check: a packet that cannot finish is skipped for this period
    std::vector<int> fitting;
    for (int i : starters) {
      if (now + ctx.duration_s[i] > slot_end + kTimeEps)
        runs[i].phase = StaPhase::Done;
      else
        fitting.push_back(i);
    }
    // SINR sampled at transmission start; simultaneous starters interfere
    for (int i : fitting) {
      double interference = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const bool on_air = runs[j].phase == StaPhase::Transmitting;
        const bool co_start =
            std::find(fitting.begin(), fitting.end(), j) != fitting.end();
        if (on_air || co_start)
          interference += ctx.interference_mw[size_t(i) * n + j];
      }
      const double sinr = ctx.signal_mw[i] / (ctx.noise_mw[0] + interference);
      const double eps = decode_error(sinr, ctx.duration_s[i], cfg);
      runs[i].tx_ok = decode_rng.uniform() >= eps;
    }
    for (int i : fitting) {
      runs[i].phase = StaPhase::Transmitting;
      runs[i].tx_end_s = now + ctx.duration_s[i];
      runs[i].attempts += 1;
    }
  }

  for (int i = 0; i < n; ++i)
    if (runs[i].success) success_out[ctx.members[i]] = 1;
}

}  // namespace

double ReliabilityReport::mean_reliability() const {
  if (reliability.empty()) return 1.0;
  return std::accumulate(reliability.begin(), reliability.end(), 0.0) /
         double(reliability.size());
}

int ReliabilityReport::violations(double r_hat) const {
  int v = 0;
  for (double r : reliability)
    if (r < r_hat) ++v;
  return v;
}

ReliabilityReport simulate_periods_active(const Network& net,
                                          const RadioConfig& cfg,
                                          const std::vector<int>& active,
                                          const SlotAssignment& assignment,
                                          int periods, uint64_t seed) {
  const int n = static_cast<int>(active.size());
  if (static_cast<int>(assignment.slot_of.size()) != n)
    throw std::invalid_argument("simulate_periods: assignment does not cover the STAs");
  if (periods < 1) throw std::invalid_argument("simulate_periods: periods must be >= 1");
  for (int z : assignment.slot_of)
    if (z < 1 || z > assignment.num_slots)
      throw std::invalid_argument("simulate_periods: slot index out of range");

  // static per-slot contexts
  const double detect = cfg.detect_range_m();
  const double noise_mw = dbm_to_mw(cfg.noise_floor);
  std::vector<SlotContext> slots(assignment.num_slots);
  for (int idx = 0; idx < n; ++idx)
    slots[assignment.slot_of[idx] - 1].members.push_back(idx);
  for (auto& ctx : slots) {
    const int m = static_cast<int>(ctx.members.size());
    ctx.duration_s.resize(m);
    ctx.signal_mw.resize(m);
    ctx.noise_mw.assign(1, noise_mw);
    ctx.senses.assign(size_t(m) * m, 0);
    ctx.interference_mw.assign(size_t(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
      const int sta_i = active[ctx.members[i]];
      ctx.duration_s[i] = net.packet_duration_s[sta_i];
      ctx.signal_mw[i] = dbm_to_mw(cfg.tx_power - net.assoc_loss(sta_i));
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        const int sta_j = active[ctx.members[j]];
        ctx.senses[size_t(i) * m + j] =
            distance(net.sta_positions[sta_i], net.sta_positions[sta_j]) <=
            detect;
        ctx.interference_mw[size_t(i) * m + j] =
            dbm_to_mw(cfg.tx_power - net.loss(sta_j, net.assoc_ap[sta_i]));
      }
    }
  }

  // per-period streams; integer success counts reduce by summation
  std::vector<std::vector<uint8_t>> period_success(
      periods, std::vector<uint8_t>(n, 0));
  parallel_for(periods, [&](int p) {
    Rng backoff_rng = derive_rng(seed, Sub::Backoff, uint64_t(p));
    Rng decode_rng = derive_rng(seed, Sub::Decode, uint64_t(p));
    for (const auto& ctx : slots) {
      if (ctx.members.empty()) continue;
      run_slot(ctx, cfg, backoff_rng, decode_rng, period_success[p]);
    }
  });

  ReliabilityReport report;
  report.periods = periods;
  report.successes.assign(n, 0);
  report.reliability.assign(n, 0.0);
  for (int p = 0; p < periods; ++p)
    for (int i = 0; i < n; ++i) report.successes[i] += period_success[p][i];
  for (int i = 0; i < n; ++i)
    report.reliability[i] = double(report.successes[i]) / double(periods);
  return report;
}

ReliabilityReport simulate_periods(const Network& net, const RadioConfig& cfg,
                                   const SlotAssignment& assignment,
                                   int periods, uint64_t seed) {
  std::vector<int> all(net.num_stas());
  std::iota(all.begin(), all.end(), 0);
  return simulate_periods_active(net, cfg, all, assignment, periods, seed);
}

void write_reliability_csv(const ReliabilityReport& report,
                           const std::filesystem::path& path,
                           const std::string& comment) {
  CsvWriter csv(path, comment, {"sta", "reliability", "successes", "periods"});
  for (size_t i = 0; i < report.reliability.size(); ++i)
    csv.row({std::to_string(i), CsvWriter::num(report.reliability[i]),
             std::to_string(report.successes[i]),
             std::to_string(report.periods)});
}

}  // namespace scneugm
