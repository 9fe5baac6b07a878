#pragma once

#include <string>
#include <vector>

#include "scneugm/ngm.hpp"

namespace scneugm {

struct RewardRecord {
  double reward = 0.0;
  int z_star = 1;
  int z_used = 1;
  double min_reliability = 1.0;
  int violations = 0;
};

// Log-scale slot/reliability reward:
//   all STAs reliable -> log(Z*/Z)
//   otherwise         -> log(min(Z*/Z, 1) * mean_k min(r_k / r_hat, 1))
// with the argument of the log floored before taking it.
RewardRecord compute_reward(const ReliabilityReport& report, int z_used,
                            int z_star, double r_hat, double floor = 1e-12);

// Per-parameter Gaussian search state of the edge generator, plus the
// baseline and the reward hit-rate that drives curriculum growth.
struct EsState {
  ParamVector mean;
  ParamVector log_var;
  double baseline = 0.0;
  bool baseline_set = false;
  double hit_rate = 0.0;  // Omega
  int batch_size = 0;     // K'
};

struct EsConfig {
  double lr = 0.1;
  double sigma0_sq = 0.1;
  int k_start = 20;
  int k_increment = 50;   // K''
  int k_total = 100;
  double omega_hat = 0.9;
  int psi = 4;            // batching-mode query bits
  int periods = 20;       // Monte-Carlo periods per step
  int max_steps = 4000;
  double gamma = 0.9;         // hit-rate smoothing
  double baseline_ema = 0.99; // reward baseline smoothing
  enum class Schedule { Adaptive, Linear, None } schedule = Schedule::Adaptive;
};

// One ES update from a sampled parameter vector and its reward. Applies the
// mean/log-variance step with the pre-update baseline, then refreshes the
// baseline EMA and the hit-rate.
EsState es_step(const EsState& state, double reward, const ParamVector& sampled,
                const EsConfig& cfg);

struct EsTraceRow {
  int step;
  int k_prime;
  double reward;
  double omega;
  int z_used;
  int z_star;
  int violations;
  double wall_ms;
};

struct EsTrainResult {
  ParamVector egnn;  // trained mean
  bool converged = false;
  int steps = 0;
  double wall_seconds = 0.0;
  std::vector<EsTraceRow> trace;
};

// Algorithm: per step, simulate a fresh network, select a K'-STA batch with
// the DHF, sample EGNN parameters, build the batch graph, color it, measure
// reliabilities with only batched STAs transmitting, reward, ES update.
// K' grows by K'' whenever Omega clears omega_hat; terminates once Omega
// clears it at K' = k_total.
EsTrainResult train_es(const RadioConfig& radio, const NgmModels& models,
                       const EsConfig& cfg, uint64_t seed);

struct PgConfig {
  double lr = 1e-3;
  int k_batch = 20;
  int k_total = 100;  // network size the batches are drawn from
  int psi = 4;
  int periods = 20;
  int max_steps = 4000;
  double gamma = 0.9;
  double baseline_ema = 0.99;
};

// REINFORCE baseline: EGNN outputs read as Bernoulli edge probabilities,
// edges sampled, (R - baseline) * grad log p(edges) backpropagated. Fixed
// batch size, no curriculum. Emits the same trace schema as train_es.
EsTrainResult train_pg(const RadioConfig& radio, const NgmModels& models,
                       const PgConfig& cfg, uint64_t seed);

}  // namespace scneugm
