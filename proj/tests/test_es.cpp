#include <cmath>

#include "doctest.h"
#include "scneugm/es.hpp"

using namespace scneugm;

namespace {

ReliabilityReport report_of(std::initializer_list<double> reliabilities,
                            int periods = 100) {
  ReliabilityReport r;
  r.periods = periods;
  for (double v : reliabilities) {
    r.reliability.push_back(v);
    r.successes.push_back(int(std::lround(v * periods)));
  }
  return r;
}

EsState fresh_state(const EsConfig& cfg) {
  EgnnSpec spec;
  EsState s;
  s.mean = ParamVector::zeros(dense_layout(spec));
  s.log_var = ParamVector::zeros(dense_layout(spec));
  for (double& v : s.log_var.values) v = std::log(cfg.sigma0_sq);
  s.batch_size = cfg.k_start;
  return s;
}

}  // namespace

TEST_CASE("reward closed forms") {
  const double r_hat = 0.99;
  // all reliable, Z = Z* -> exactly zero
  CHECK(compute_reward(report_of({1.0, 1.0, 1.0}), 4, 4, r_hat).reward ==
        doctest::Approx(0.0).epsilon(1e-12));
  // all reliable, Z = 2 Z* -> -log 2
  CHECK(compute_reward(report_of({1.0, 1.0}), 8, 4, r_hat).reward ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  // one dead STA among ten, Z <= Z* -> log 0.9
  std::vector<double> rel(10, 1.0);
  rel[3] = 0.0;
  ReliabilityReport rep;
  rep.periods = 100;
  for (double v : rel) {
    rep.reliability.push_back(v);
    rep.successes.push_back(int(v * 100));
  }
  const RewardRecord rec = compute_reward(rep, 3, 5, r_hat);
  CHECK(rec.reward == doctest::Approx(std::log(0.9)).epsilon(1e-12));
  CHECK(rec.violations == 1);
  CHECK(rec.min_reliability == doctest::Approx(0.0));
}

TEST_CASE("reward never exceeds log(Z*/Z), equality only when clean") {
  const double r_hat = 0.99;
  Rng rng(55);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 1 + int(rng.below(12));
    const int z = 1 + int(rng.below(10));
    const int z_star = 1 + int(rng.below(10));
    ReliabilityReport rep;
    rep.periods = 50;
    for (int i = 0; i < k; ++i) {
      const double r = rng.uniform() < 0.5 ? 1.0 : rng.uniform();
      rep.reliability.push_back(r);
      rep.successes.push_back(int(r * 50));
    }
    const RewardRecord rec = compute_reward(rep, z, z_star, r_hat);
    const double cap = std::log(double(z_star) / z);
    CHECK(rec.reward <= cap + 1e-12);
    if (rec.violations == 0)
      CHECK(rec.reward == doctest::Approx(cap).epsilon(1e-12));
    else
      CHECK(rec.reward < cap);
  }
}

TEST_CASE("reward is monotone nondecreasing in each reliability") {
  const double r_hat = 0.99;
  ReliabilityReport low = report_of({0.5, 0.8, 1.0});
  ReliabilityReport high = report_of({0.6, 0.8, 1.0});
  CHECK(compute_reward(low, 2, 3, r_hat).reward <=
        compute_reward(high, 2, 3, r_hat).reward);
}

TEST_CASE("reward floor guards the log at zero reliability") {
  ReliabilityReport rep = report_of({0.0});
  const RewardRecord rec = compute_reward(rep, 1, 1, 0.99);
  CHECK(std::isfinite(rec.reward));
  CHECK(rec.reward == doctest::Approx(std::log(1e-12)));
}

TEST_CASE("es_step: zero advantage is the identity on mean and variance") {
  EsConfig cfg;
  EsState s = fresh_state(cfg);
  s.baseline = -0.4;
  s.baseline_set = true;
  Rng rng(3);
  const ParamVector sampled = gaussian_sample(s.mean, s.log_var, rng);
  const EsState next = es_step(s, -0.4, sampled, cfg);  // reward == baseline
  CHECK(next.mean.values == s.mean.values);
  CHECK(next.log_var.values == s.log_var.values);
  CHECK(next.baseline == doctest::Approx(-0.4));
}

TEST_CASE("es_step: sampling the mean with positive advantage shrinks variance") {
  EsConfig cfg;
  EsState s = fresh_state(cfg);
  s.baseline = -1.0;
  s.baseline_set = true;
  const double adv = 0.5;  // reward - baseline
  const EsState next = es_step(s, s.baseline + adv, s.mean, cfg);
  for (size_t i = 0; i < s.mean.values.size(); ++i) {
    CHECK(next.mean.values[i] == doctest::Approx(s.mean.values[i]));
    CHECK(next.log_var.values[i] ==
          doctest::Approx(s.log_var.values[i] - cfg.lr * adv / 2.0));
  }
}

TEST_CASE("es_step update matches the closed-form gaussian score") {
  EsConfig cfg;
  EsState s = fresh_state(cfg);
  s.baseline = 0.1;
  s.baseline_set = true;
  Rng rng(8);
  const ParamVector sampled = gaussian_sample(s.mean, s.log_var, rng);
  const double reward = 0.35;
  const double adv = reward - s.baseline;
  const EsState next = es_step(s, reward, sampled, cfg);
  for (size_t i = 0; i < s.mean.values.size(); ++i) {
    const double var = std::exp(s.log_var.values[i]);
    const double delta = sampled.values[i] - s.mean.values[i];
    CHECK(next.mean.values[i] ==
          doctest::Approx(s.mean.values[i] + cfg.lr * adv * delta / var));
    CHECK(next.log_var.values[i] ==
          doctest::Approx(s.log_var.values[i] +
                          cfg.lr * adv * (delta * delta / (2.0 * var) - 0.5)));
  }
  // baseline moved toward the reward by the EMA factor
  CHECK(next.baseline ==
        doctest::Approx(cfg.baseline_ema * s.baseline +
                        (1.0 - cfg.baseline_ema) * reward));
}

TEST_CASE("hit rate approaches one geometrically under nonnegative rewards") {
  EsConfig cfg;
  EsState s = fresh_state(cfg);
  s.baseline_set = true;
  s.baseline = 0.0;
  Rng rng(2);
  const ParamVector sampled = gaussian_sample(s.mean, s.log_var, rng);
  double expected = 0.0;
  for (int i = 0; i < 40; ++i) {
    s = es_step(s, 0.0, sampled, cfg);
    expected = cfg.gamma * expected + (1.0 - cfg.gamma);
    CHECK(s.hit_rate == doctest::Approx(expected));
  }
  CHECK(s.hit_rate > 0.98);
}

TEST_CASE("edge features clamp undetectable cross losses at s_max") {
  RadioConfig cfg;
  cfg.num_stas = 2;
  // far apart: each cannot reach the other's AP
  const Network net =
      network_from_positions(cfg, {{5.0, 5.0}, {95.0, 95.0}});
  const EdgeFeatures f = edge_features(net, cfg, 0, 1, {0.3, 0.2});
  CHECK(f.s_i_cross == doctest::Approx(cfg.s_max()));
  CHECK(f.s_i_own == doctest::Approx(net.assoc_loss(0)));
  CHECK(f.s_j_own == doctest::Approx(net.assoc_loss(1)));
  CHECK(f.pred_c == doctest::Approx(0.3));
  CHECK(f.pred_h == doctest::Approx(0.2));

  // colocated pair sharing an AP: all three losses coincide
  const Network close =
      network_from_positions(cfg, {{35.0, 45.0}, {35.0, 45.0}});
  const EdgeFeatures g = edge_features(close, cfg, 0, 1, {0.5, 0.5});
  CHECK(g.s_i_own == doctest::Approx(g.s_j_own));
  CHECK(g.s_i_own == doctest::Approx(g.s_i_cross));
}

TEST_CASE("egnn: zero weights score one half and round up to an edge") {
  EgnnSpec spec;
  ParamVector params = ParamVector::zeros(dense_layout(spec));
  const EdgeFeatures f{80.0, 90.0, 85.0, 0.4, 0.1};
  CHECK(egnn_score(spec, params, f) == doctest::Approx(0.5));
  CHECK(egnn_edge(spec, params, f) == 1);  // 0.5 rounds up
  // re-evaluation is stable
  CHECK(egnn_edge(spec, params, f) == egnn_edge(spec, params, f));
}

TEST_CASE("build_graph honors the pair mask") {
  EgnnSpec spec;
  ParamVector params = ParamVector::zeros(dense_layout(spec));  // every edge 1
  auto features = [](int, int) {
    return EdgeFeatures{80.0, 90.0, 85.0, 0.5, 0.5};
  };
  const auto all = all_ordered_pairs(3);
  const Graph full = build_graph(3, all, features, spec, params);
  CHECK(full.edge_count() == 6);
  for (int i = 0; i < 3; ++i) CHECK(full.at(i, i) == 0);

  const Graph empty = build_graph(3, {}, features, spec, params);
  CHECK(empty.edge_count() == 0);

  const std::vector<std::pair<int, int>> some{{0, 1}, {1, 0}, {2, 1}};
  const Graph masked = build_graph(3, some, features, spec, params);
  CHECK(masked.edge_count() == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(masked.at(i, j) <= full.at(i, j));
}

TEST_CASE("short es and pg runs: seeded reproducibility, trace schema") {
  RadioConfig radio;
  radio.num_stas = 30;
  NgmModels models;
  models.senn = SennModel::init(1);
  models.pred = PredictorModel::init(1);
  models.dhf = DhfModel::init(1);
  models.egnn = ParamVector::zeros(dense_layout(models.egnn_spec));

  EsConfig es_cfg;
  es_cfg.k_start = 8;
  es_cfg.k_total = 30;
  es_cfg.periods = 5;
  es_cfg.max_steps = 6;
  const EsTrainResult a = train_es(radio, models, es_cfg, 12);
  const EsTrainResult b = train_es(radio, models, es_cfg, 12);
  REQUIRE(a.trace.size() == 6);
  CHECK(a.egnn.values == b.egnn.values);
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].reward == b.trace[i].reward);
    CHECK(a.trace[i].k_prime == 8);  // omega cannot clear 0.9 in 6 steps
    CHECK(a.trace[i].z_used >= 1);
    CHECK(a.trace[i].z_star >= 1);
  }

  PgConfig pg_cfg;
  pg_cfg.k_batch = 8;
  pg_cfg.k_total = 30;
  pg_cfg.periods = 5;
  pg_cfg.max_steps = 6;
  const EsTrainResult c = train_pg(radio, models, pg_cfg, 12);
  const EsTrainResult d = train_pg(radio, models, pg_cfg, 12);
  CHECK(c.egnn.values == d.egnn.values);
  CHECK(c.trace.size() == 6);
}

TEST_CASE("linear schedule grows k by one each step") {
  RadioConfig radio;
  radio.num_stas = 12;
  NgmModels models;
  models.senn = SennModel::init(2);
  models.pred = PredictorModel::init(2);
  models.dhf = DhfModel::init(2);
  models.egnn = ParamVector::zeros(dense_layout(models.egnn_spec));
  EsConfig cfg;
  cfg.k_start = 5;
  cfg.k_total = 12;
  cfg.periods = 3;
  cfg.max_steps = 10;
  cfg.schedule = EsConfig::Schedule::Linear;
  const EsTrainResult res = train_es(radio, models, cfg, 9);
  for (size_t i = 0; i < res.trace.size(); ++i)
    CHECK(res.trace[i].k_prime == std::min(5 + int(i), 12));
}
