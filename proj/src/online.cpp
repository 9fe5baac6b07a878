#include "scneugm/online.hpp"

#include <algorithm>
#include <cmath>

#include "scneugm/util.hpp"

namespace scneugm {

RoundOutput run_round(OnlineState& state, const RadioConfig& cfg,
                      const NgmModels& models, const OnlineConfig& ocfg,
                      uint64_t seed, int round) {
  RoundOutput out;
  out.record.round = round;
  const int k = state.net.num_stas();
  WallTimer tau;

  WallTimer t_emb;
  const auto states = measure_states(state.net, cfg);
  const auto emb = embed_all(models.senn, states, cfg);
  out.record.phase_ms[kPhEmb] = t_emb.ms();

  std::vector<std::pair<int, int>> pair_list;
  if (ocfg.mode == PairMode::AllPairs) {
    pair_list = all_ordered_pairs(k);
  } else {
    WallTimer t_hsh;
    const auto codes = hash_all(models.dhf, emb);
    out.record.phase_ms[kPhHsh] = t_hsh.ms();

    WallTimer t_buc;
    PairSet pairs =
        bucket_pairs(codes, ocfg.psi, ocfg.upsilon,
                     derive_rng(seed, Sub::Bucket, uint64_t(round)).next());
    if (ocfg.augment)
      for (const auto& edges : state.history)
        for (const auto& [i, j] : edges) pairs.add(i, j);
    pair_list = pairs.sorted();
    out.record.phase_ms[kPhBuc] = t_buc.ms();
  }
  out.record.pair_count = static_cast<long>(pair_list.size());

  WallTimer t_pre;
  const auto preds = predict_pairs(models.pred, emb, pair_list);
  out.record.phase_ms[kPhPre] = t_pre.ms();

  WallTimer t_eg;
  Graph graph = Graph::empty(k);
  {
    std::vector<uint8_t> edges(pair_list.size(), 0);
    parallel_for(static_cast<int>(pair_list.size()), [&](int p) {
      const auto f = edge_features(state.net, cfg, pair_list[p].first,
                                   pair_list[p].second, preds[p]);
      edges[p] = uint8_t(egnn_edge(models.egnn_spec, models.egnn, f));
    });
    for (size_t p = 0; p < pair_list.size(); ++p)
      if (edges[p]) {
        graph.set(pair_list[p].first, pair_list[p].second, 1);
        out.edges.push_back(pair_list[p]);
      }
  }
  out.record.phase_ms[kPhEG] = t_eg.ms();

  WallTimer t_col;
  out.assignment = greedy_color(graph);
  out.record.phase_ms[kPhCol] = t_col.ms();

  out.record.z_used = out.assignment.num_slots;
  out.record.tau_ms = tau.ms();

  state.history.push_back(out.edges);
  while (static_cast<int>(state.history.size()) >
         std::max(ocfg.history_window, 0))
    state.history.pop_front();
  return out;
}

OnlineResult run_online(const RadioConfig& cfg, const NgmModels& models,
                        const OnlineConfig& ocfg, uint64_t seed) {
  OnlineResult result;
  OnlineState state;
  state.net = generate_network(cfg, seed);
  const int k = state.net.num_stas();

  Rng mob = derive_rng(seed, Sub::Heading);
  state.speeds.resize(k);
  state.headings.resize(k);
  for (int i = 0; i < k; ++i) {
    state.speeds[i] =
        ocfg.mobility ? mob.uniform(ocfg.speed_min, ocfg.speed_max) : 0.0;
    state.headings[i] = mob.uniform(0.0, 2.0 * M_PI);
  }

  long total_success = 0;
  long total_opportunities = 0;
  double tau_sum = 0.0;
  double slot_sum = 0.0;
  for (int round = 1; round <= ocfg.rounds; ++round) {
    RoundOutput out = run_round(state, cfg, models, ocfg, seed, round);

    const double dt_ms =
        ocfg.round_duration_ms(out.record.tau_ms, out.record.pair_count, k);
    if (ocfg.mobility)
      state.net = move_stations(state.net, cfg, dt_ms / 1000.0, state.speeds,
                                state.headings,
                                derive_rng(seed, Sub::Mobility, round).next());

    if (ocfg.periods_per_round > 0) {
      const ReliabilityReport report = simulate_periods(
          state.net, cfg, out.assignment, ocfg.periods_per_round,
          derive_rng(seed, Sub::Eval, round).next());
      out.record.violations = report.violations(cfg.reliability_target);
      long success = 0;
      for (int s : report.successes) success += s;
      total_success += success;
      total_opportunities += long(report.periods) * k;
      out.record.loss_rate =
          1.0 - double(success) / (double(report.periods) * k);
      result.last_report = report;
    }
    result.last_assignment = out.assignment;
    tau_sum += out.record.tau_ms;
    slot_sum += out.record.z_used;
    result.rounds.push_back(out.record);
  }
  const int r = std::max<int>(1, static_cast<int>(result.rounds.size()));
  result.mean_slots = slot_sum / r;
  result.mean_tau_ms = tau_sum / r;
  result.packet_loss_rate =
      total_opportunities > 0
          ? 1.0 - double(total_success) / double(total_opportunities)
          : 0.0;
  return result;
}

std::vector<SlotHistogramRow> per_slot_histogram(const SlotAssignment& assign,
                                                 const ReliabilityReport& report,
                                                 double r_hat) {
  std::vector<SlotHistogramRow> rows(assign.num_slots);
  for (int z = 0; z < assign.num_slots; ++z) rows[z] = {z + 1, 0, 0};
  for (size_t i = 0; i < assign.slot_of.size(); ++i) {
    auto& row = rows[assign.slot_of[i] - 1];
    row.sta_count += 1;
    if (report.reliability[i] < r_hat) row.violations += 1;
  }
  return rows;
}

}  // namespace scneugm
