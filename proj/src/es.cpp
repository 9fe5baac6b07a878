#include "scneugm/es.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scneugm/util.hpp"

namespace scneugm {

RewardRecord compute_reward(const ReliabilityReport& report, int z_used,
                            int z_star, double r_hat, double floor) {
  if (z_used < 1 || z_star < 1)
    throw std::invalid_argument("compute_reward: slot counts must be >= 1");
  RewardRecord rec;
  rec.z_used = z_used;
  rec.z_star = z_star;
  rec.violations = report.violations(r_hat);
  rec.min_reliability = 1.0;
  for (double r : report.reliability)
    rec.min_reliability = std::min(rec.min_reliability, r);
  const double ratio = double(z_star) / double(z_used);
  if (rec.violations == 0) {
    rec.reward = std::log(ratio);
  } else {
    double mean_capped = 0.0;
    for (double r : report.reliability)
      mean_capped += std::min(r / r_hat, 1.0);
    mean_capped /= double(report.reliability.size());
    rec.reward = std::log(std::max(std::min(ratio, 1.0) * mean_capped, floor));
  }
  return rec;
}

EsState es_step(const EsState& state, double reward, const ParamVector& sampled,
                const EsConfig& cfg) {
  if (!state.mean.layout->same_as(*sampled.layout))
    throw std::invalid_argument("es_step: sampled layout mismatch");
  EsState next = state;
  if (!state.baseline_set) {
    next.baseline = reward;
    next.baseline_set = true;
  } else {
    const double adv = reward - state.baseline;
    const size_t n = state.mean.values.size();
    for (size_t i = 0; i < n; ++i) {
      const double m = state.mean.values[i];
      const double var = std::exp(state.log_var.values[i]);
      const double delta = sampled.values[i] - m;
      next.mean.values[i] = m + cfg.lr * adv * delta / var;
      next.log_var.values[i] =
          state.log_var.values[i] +
          cfg.lr * adv * (delta * delta / (2.0 * var) - 0.5);
    }
    next.baseline =
        cfg.baseline_ema * state.baseline + (1.0 - cfg.baseline_ema) * reward;
  }
  next.hit_rate = cfg.gamma * state.hit_rate +
                  (1.0 - cfg.gamma) * (reward >= 0.0 ? 1.0 : 0.0);
  return next;
}

namespace {

struct StepEnv {
  Network net;
  std::vector<StationState> states;
  std::vector<EmbeddingVector> emb;
  PairIndicators ind;
  std::vector<int> batch;
};

StepEnv build_step_env(const RadioConfig& cfg, const NgmModels& models,
                       int k_prime, int psi, uint64_t seed, int step) {
  StepEnv env;
  env.net =
      generate_network(cfg, derive_rng(seed, Sub::TrainNet, step).next());
  env.states = measure_states(env.net, cfg);
  env.emb = embed_all(models.senn, env.states, cfg);
  env.ind = pair_indicators(env.net, cfg);
  const auto codes = hash_all(models.dhf, env.emb);
  env.batch = batch_select(codes, psi, k_prime,
                           derive_rng(seed, Sub::Batch, step).next());
  return env;
}

struct BatchEval {
  SlotAssignment assign;
  int z_star = 1;
  RewardRecord rec;
};

BatchEval evaluate_batch(const RadioConfig& cfg, const StepEnv& env,
                         const Graph& graph, int periods, uint64_t seed,
                         int step) {
  BatchEval eval;
  eval.assign = greedy_color(graph);
  eval.z_star = approx_optimal_slots_subset(env.ind, env.batch);
  const ReliabilityReport report =
      simulate_periods_active(env.net, cfg, env.batch, eval.assign, periods,
                              derive_rng(seed, Sub::Eval, step).next());
  eval.rec = compute_reward(report, eval.assign.num_slots, eval.z_star,
                            cfg.reliability_target);
  return eval;
}

}  // namespace

EsTrainResult train_es(const RadioConfig& radio, const NgmModels& models,
                       const EsConfig& cfg, uint64_t seed) {
  RadioConfig net_cfg = radio;
  net_cfg.num_stas = cfg.k_total;

  EsState state;
  state.mean = ParamVector::zeros(dense_layout(models.egnn_spec));
  state.log_var = ParamVector::zeros(dense_layout(models.egnn_spec));
  for (double& v : state.log_var.values) v = std::log(cfg.sigma0_sq);
  state.batch_size =
      cfg.schedule == EsConfig::Schedule::None ? cfg.k_total : cfg.k_start;

  EsTrainResult result;
  WallTimer total;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    WallTimer step_timer;
    if (cfg.schedule == EsConfig::Schedule::Linear)
      state.batch_size = std::min(cfg.k_start + (step - 1), cfg.k_total);

    const StepEnv env = build_step_env(net_cfg, models, state.batch_size,
                                       cfg.psi, seed, step);
    Rng sample_rng = derive_rng(seed, Sub::EsSample, step);
    const ParamVector sampled =
        gaussian_sample(state.mean, state.log_var, sample_rng);

    const int n = static_cast<int>(env.batch.size());
    const auto pairs = all_ordered_pairs(n);
    std::vector<std::pair<int, int>> global_pairs(pairs.size());
    for (size_t p = 0; p < pairs.size(); ++p)
      global_pairs[p] = {env.batch[pairs[p].first], env.batch[pairs[p].second]};
    const auto preds = predict_pairs(models.pred, env.emb, global_pairs);
    Graph graph = Graph::empty(n);
    {
      std::vector<uint8_t> edges(pairs.size(), 0);
      parallel_for(static_cast<int>(pairs.size()), [&](int p) {
        const auto f = edge_features(env.net, net_cfg, global_pairs[p].first,
                                     global_pairs[p].second, preds[p]);
        edges[p] = uint8_t(egnn_edge(models.egnn_spec, sampled, f));
      });
      for (size_t p = 0; p < pairs.size(); ++p)
        graph.set(pairs[p].first, pairs[p].second, edges[p]);
    }
    const BatchEval eval =
        evaluate_batch(net_cfg, env, graph, cfg.periods, seed, step);
    state = es_step(state, eval.rec.reward, sampled, cfg);

    result.trace.push_back({step, state.batch_size, eval.rec.reward,
                            state.hit_rate, eval.rec.z_used, eval.rec.z_star,
                            eval.rec.violations, step_timer.ms()});
    result.steps = step;

    if (state.hit_rate >= cfg.omega_hat) {
      if (state.batch_size >= cfg.k_total) {
        result.converged = true;
        break;
      }
      if (cfg.schedule == EsConfig::Schedule::Adaptive)
        state.batch_size =
            std::min(state.batch_size + cfg.k_increment, cfg.k_total);
    }
  }
  result.egnn = state.mean;
  result.wall_seconds = total.seconds();
  return result;
}

EsTrainResult train_pg(const RadioConfig& radio, const NgmModels& models,
                       const PgConfig& cfg, uint64_t seed) {
  RadioConfig net_cfg = radio;
  net_cfg.num_stas = cfg.k_total;

  ParamVector params = ParamVector::zeros(dense_layout(models.egnn_spec));
  double baseline = 0.0;
  bool baseline_set = false;
  double omega = 0.0;
  constexpr double kClamp = 1e-9;

  EsTrainResult result;
  WallTimer total;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    WallTimer step_timer;
    const StepEnv env =
        build_step_env(net_cfg, models, cfg.k_batch, cfg.psi, seed, step);
    const int n = static_cast<int>(env.batch.size());
    const auto pairs = all_ordered_pairs(n);
    std::vector<std::pair<int, int>> global_pairs(pairs.size());
    for (size_t p = 0; p < pairs.size(); ++p)
      global_pairs[p] = {env.batch[pairs[p].first], env.batch[pairs[p].second]};
    const auto preds = predict_pairs(models.pred, env.emb, global_pairs);

    Rng edge_rng = derive_rng(seed, Sub::PgSample, step);
    Graph graph = Graph::empty(n);
    std::vector<DenseCache> caches(pairs.size());
    std::vector<double> probs(pairs.size());
    std::vector<uint8_t> sampled_edges(pairs.size());
    for (size_t p = 0; p < pairs.size(); ++p) {
      const auto f = edge_features(env.net, net_cfg, global_pairs[p].first,
                                   global_pairs[p].second, preds[p]);
      probs[p] = egnn_score(models.egnn_spec, params, f, &caches[p]);
      sampled_edges[p] = edge_rng.uniform() < probs[p] ? 1 : 0;
      graph.set(pairs[p].first, pairs[p].second, sampled_edges[p]);
    }

    const BatchEval eval =
        evaluate_batch(net_cfg, env, graph, cfg.periods, seed, step);
    if (!baseline_set) {
      baseline = eval.rec.reward;
      baseline_set = true;
    } else {
      const double adv = eval.rec.reward - baseline;
      if (adv != 0.0) {
        ParamVector grads = ParamVector::zeros(params.layout);
        for (size_t p = 0; p < pairs.size(); ++p) {
          const double y = std::clamp(probs[p], kClamp, 1.0 - kClamp);
          const double dlogp = sampled_edges[p] ? 1.0 / y : -1.0 / (1.0 - y);
          const std::vector<double> dout{-adv * dlogp};
          dense_backward(models.egnn_spec, params, "", caches[p], dout, grads,
                         {});
        }
        params = sgd_step(params, grads, cfg.lr);
      }
      baseline = cfg.baseline_ema * baseline +
                 (1.0 - cfg.baseline_ema) * eval.rec.reward;
    }
    omega = cfg.gamma * omega + (1.0 - cfg.gamma) *
                                    (eval.rec.reward >= 0.0 ? 1.0 : 0.0);

    result.trace.push_back({step, n, eval.rec.reward, omega, eval.rec.z_used,
                            eval.rec.z_star, eval.rec.violations,
                            step_timer.ms()});
    result.steps = step;
  }
  result.egnn = params;
  result.wall_seconds = total.seconds();
  return result;
}

}  // namespace scneugm
