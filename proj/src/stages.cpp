#include "scneugm/stages.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "scneugm/util.hpp"

namespace scneugm {

namespace {

namespace fs = std::filesystem;

std::string comment_line(const ExperimentConfig& cfg) {
  return "config_hash=" + cfg.config_hash + " seed=" + std::to_string(cfg.seed);
}

fs::path ckpt_path(const ExperimentConfig& cfg, const std::string& stage) {
  return cfg.output_dir / (stage + "." + cfg.config_hash + ".ckpt.json");
}

fs::path marker_path(const ExperimentConfig& cfg, const std::string& stage) {
  return cfg.output_dir / (stage + "." + cfg.config_hash + ".done");
}

bool stage_done(const ExperimentConfig& cfg, const std::string& stage) {
  return fs::exists(marker_path(cfg, stage));
}

void mark_done(const ExperimentConfig& cfg, const std::string& stage) {
  fs::create_directories(cfg.output_dir);
  std::ofstream(marker_path(cfg, stage)) << comment_line(cfg) << "\n";
}

void require_stage(const ExperimentConfig& cfg, const std::string& stage,
                   const std::string& wanted_for) {
  if (!stage_done(cfg, stage))
    throw UserError("stage " + wanted_for + " requires " + stage +
                    " first (missing " + ckpt_path(cfg, stage).string() + ")");
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << doc.dump(1) << "\n";
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("missing artifact " + path.string());
  nlohmann::json doc;
  in >> doc;
  return doc;
}

void write_trace_csv(const fs::path& path, const ExperimentConfig& cfg,
                     const std::vector<std::string>& header,
                     const std::vector<TraceRow>& trace) {
  CsvWriter csv(path, comment_line(cfg), header);
  for (const auto& row : trace) {
    std::vector<std::string> cells{std::to_string(row.step)};
    for (double v : row.cols) cells.push_back(CsvWriter::num(v));
    csv.row(cells);
  }
}

// es/pg trace: deterministic columns in the CSV, wall times in a sidecar
// JSON (CSV artifacts must be byte-identical across reruns).
void write_es_artifacts(const fs::path& csv_path, const fs::path& timing_path,
                        const ExperimentConfig& cfg, const EsTrainResult& res) {
  CsvWriter csv(csv_path, comment_line(cfg),
                {"step", "k_prime", "reward", "omega", "z_used", "z_star",
                 "violations"});
  for (const auto& r : res.trace)
    csv.row({std::to_string(r.step), std::to_string(r.k_prime),
             CsvWriter::num(r.reward), CsvWriter::num(r.omega),
             std::to_string(r.z_used), std::to_string(r.z_star),
             std::to_string(r.violations)});
  nlohmann::json timing;
  timing["total_seconds"] = res.wall_seconds;
  timing["converged"] = res.converged;
  timing["steps"] = res.steps;
  std::vector<double> per_step;
  per_step.reserve(res.trace.size());
  for (const auto& r : res.trace) per_step.push_back(r.wall_ms);
  timing["step_ms"] = per_step;
  write_json(timing_path, timing);
}

void write_rounds_csv(const fs::path& path, const ExperimentConfig& cfg,
                      const std::vector<std::pair<int, OnlineResult>>& runs) {
  CsvWriter csv(path, comment_line(cfg),
                {"topology", "round", "pair_count", "z_used", "violations",
                 "loss_rate"});
  for (const auto& [topology, result] : runs)
    for (const auto& r : result.rounds)
      csv.row({std::to_string(topology), std::to_string(r.round),
               std::to_string(r.pair_count), std::to_string(r.z_used),
               std::to_string(r.violations), CsvWriter::num(r.loss_rate)});
}

nlohmann::json timing_json(const std::vector<std::pair<int, OnlineResult>>& runs) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& [topology, result] : runs)
    for (const auto& r : result.rounds)
      rounds.push_back({{"topology", topology},
                        {"round", r.round},
                        {"tau_ms", r.tau_ms},
                        {"emb_ms", r.phase_ms[kPhEmb]},
                        {"hsh_ms", r.phase_ms[kPhHsh]},
                        {"buc_ms", r.phase_ms[kPhBuc]},
                        {"pre_ms", r.phase_ms[kPhPre]},
                        {"eg_ms", r.phase_ms[kPhEG]},
                        {"col_ms", r.phase_ms[kPhCol]}});
  return nlohmann::json{{"rounds", rounds}};
}

uint64_t topology_seed(const ExperimentConfig& cfg, int topology) {
  return derive_rng(cfg.seed, Sub::Eval, uint64_t(topology)).next();
}

std::string stage_gen_net(const ExperimentConfig& cfg) {
  const Network net = generate_network(cfg.radio, cfg.seed);
  {
    CsvWriter csv(cfg.output_dir / "aps.csv", comment_line(cfg),
                  {"ap", "x", "y"});
    for (int a = 0; a < net.num_aps(); ++a)
      csv.row({std::to_string(a), CsvWriter::num(net.ap_positions[a].x),
               CsvWriter::num(net.ap_positions[a].y)});
  }
  {
    CsvWriter csv(cfg.output_dir / "stations.csv", comment_line(cfg),
                  {"sta", "x", "y", "assoc_ap", "assoc_loss_db",
                   "duration_us", "marginal"});
    for (int k = 0; k < net.num_stas(); ++k)
      csv.row({std::to_string(k), CsvWriter::num(net.sta_positions[k].x),
               CsvWriter::num(net.sta_positions[k].y),
               std::to_string(net.assoc_ap[k]),
               CsvWriter::num(net.assoc_loss(k)),
               CsvWriter::num(net.packet_duration_s[k] * 1e6),
               std::to_string(int(net.marginal[k]))});
  }
  const PairIndicators ind = pair_indicators(net, cfg.radio);
  write_pair_indicators_csv(ind, cfg.output_dir / "indicators.csv",
                            comment_line(cfg));
  long contending = 0, hidden = 0;
  for (uint8_t v : ind.contending) contending += v;
  for (uint8_t v : ind.hidden) hidden += v;
  std::ostringstream msg;
  msg << "gen-net: K=" << net.num_stas() << " A=" << net.num_aps()
      << " contending_pairs=" << contending << " hidden_pairs=" << hidden;
  return msg.str();
}

std::string stage_pretrain_embed(const ExperimentConfig& cfg) {
  const PretrainResult res =
      pretrain_autoencoder(cfg.radio, cfg.embed, cfg.seed);
  write_trace_csv(cfg.output_dir / "embed_trace.csv", cfg,
                  {"step", "loss", "normalized_loss"}, res.trace);
  save_checkpoint(ckpt_path(cfg, "pretrain-embed"),
                  senn_to_checkpoint(res.model), cfg.config_hash, cfg.seed);
  std::ostringstream msg;
  msg << "pretrain-embed: steps=" << res.trace.size() << " final_norm_loss="
      << (res.trace.empty() ? 1.0 : res.trace.back().cols[1]);
  return msg.str();
}

SennModel load_senn(const ExperimentConfig& cfg) {
  return senn_from_checkpoint(load_checkpoint(ckpt_path(cfg, "pretrain-embed")));
}

std::string stage_pretrain_pred(const ExperimentConfig& cfg) {
  require_stage(cfg, "pretrain-embed", "pretrain-pred");
  const SennModel senn = load_senn(cfg);
  const PredictorPretrainResult res =
      pretrain_predictors(cfg.radio, senn, cfg.pred, cfg.seed);
  write_trace_csv(cfg.output_dir / "pred_trace.csv", cfg,
                  {"step", "loss_pc", "loss_ph", "norm_pc", "norm_ph"},
                  res.trace);
  save_checkpoint(ckpt_path(cfg, "pretrain-pred"),
                  predictors_to_checkpoint(res.model), cfg.config_hash,
                  cfg.seed);
  std::ostringstream msg;
  msg << "pretrain-pred: steps=" << res.trace.size();
  if (!res.trace.empty())
    msg << " norm_pc=" << res.trace.back().cols[2]
        << " norm_ph=" << res.trace.back().cols[3];
  return msg.str();
}

std::string stage_train_dhf(const ExperimentConfig& cfg) {
  require_stage(cfg, "pretrain-embed", "train-dhf");
  const SennModel senn = load_senn(cfg);
  const DhfTrainResult res = train_dhf(cfg.radio, senn, cfg.dhf, cfg.seed);
  write_trace_csv(cfg.output_dir / "dhf_trace.csv", cfg,
                  {"step", "similarity", "correlation", "total",
                   "norm_similarity", "norm_correlation"},
                  res.trace);
  save_checkpoint(ckpt_path(cfg, "train-dhf"), dhf_to_checkpoint(res.model),
                  cfg.config_hash, cfg.seed);
  std::ostringstream msg;
  msg << "train-dhf: steps=" << res.trace.size();
  if (!res.trace.empty()) msg << " total_loss=" << res.trace.back().cols[2];
  return msg.str();
}

std::string stage_dhf_grid(const ExperimentConfig& cfg) {
  require_stage(cfg, "pretrain-embed", "dhf-grid");
  require_stage(cfg, "train-dhf", "dhf-grid");
  const SennModel senn = load_senn(cfg);
  const DhfModel dhf =
      dhf_from_checkpoint(load_checkpoint(ckpt_path(cfg, "train-dhf")));

  CsvWriter csv(cfg.output_dir / "dhf_grid.csv", comment_line(cfg),
                {"psi", "upsilon", "seed", "pair_fraction", "recall",
                 "efficiency"});
  for (int s = 0; s < cfg.grid.seeds; ++s) {
    const uint64_t net_seed = derive_rng(cfg.seed, Sub::Eval, 1000 + s).next();
    const Network net = generate_network(cfg.radio, net_seed);
    const auto states = measure_states(net, cfg.radio);
    const auto emb = embed_all(senn, states, cfg.radio);
    const auto codes = hash_all(dhf, emb);
    const PairIndicators ind = pair_indicators(net, cfg.radio);
    const int k = net.num_stas();
    long ch_total = 0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j && ind.either(i, j)) ++ch_total;
    const double all_pairs = double(k) * double(k - 1);
    for (int psi : cfg.grid.psis)
      for (int upsilon : cfg.grid.upsilons) {
        const PairSet pairs = bucket_pairs(
            codes, psi, upsilon,
            derive_rng(net_seed, Sub::Bucket, uint64_t(psi) * 1000 + upsilon)
                .next());
        long hit = 0;
        for (const auto& [i, j] : pairs.sorted())
          if (ind.either(i, j)) ++hit;
        const double fraction = double(pairs.size()) / all_pairs;
        const double recall =
            ch_total > 0 ? double(hit) / double(ch_total) : 1.0;
        csv.row({std::to_string(psi), std::to_string(upsilon),
                 std::to_string(s), CsvWriter::num(fraction),
                 CsvWriter::num(recall), CsvWriter::num(recall - fraction)});
      }
  }
  return "dhf-grid: wrote dhf_grid.csv over " +
         std::to_string(cfg.grid.psis.size() * cfg.grid.upsilons.size()) +
         " cells x " + std::to_string(cfg.grid.seeds) + " seeds";
}

std::string stage_train_es(const ExperimentConfig& cfg) {
  require_stage(cfg, "pretrain-embed", "train-es");
  require_stage(cfg, "pretrain-pred", "train-es");
  require_stage(cfg, "train-dhf", "train-es");
  NgmModels models = load_models(cfg, /*need_egnn=*/false);
  const EsTrainResult res = train_es(cfg.radio, models, cfg.es, cfg.seed);
  write_es_artifacts(cfg.output_dir / "es_trace.csv",
                     cfg.output_dir / "es_timing.json", cfg, res);
  CheckpointMap nets;
  nets["EGNN"] = {dense_spec_json(models.egnn_spec), res.egnn.values};
  save_checkpoint(ckpt_path(cfg, "train-es"), nets, cfg.config_hash, cfg.seed);
  std::ostringstream msg;
  msg << "train-es: steps=" << res.steps
      << (res.converged ? " converged" : " did not converge")
      << " final_omega="
      << (res.trace.empty() ? 0.0 : res.trace.back().omega);
  return msg.str();
}

std::string stage_train_pg(const ExperimentConfig& cfg) {
  require_stage(cfg, "pretrain-embed", "train-pg");
  require_stage(cfg, "pretrain-pred", "train-pg");
  require_stage(cfg, "train-dhf", "train-pg");
  NgmModels models = load_models(cfg, /*need_egnn=*/false);
  const EsTrainResult res = train_pg(cfg.radio, models, cfg.pg, cfg.seed);
  write_es_artifacts(cfg.output_dir / "pg_trace.csv",
                     cfg.output_dir / "pg_timing.json", cfg, res);
  CheckpointMap nets;
  nets["EGNN"] = {dense_spec_json(models.egnn_spec), res.egnn.values};
  save_checkpoint(ckpt_path(cfg, "train-pg"), nets, cfg.config_hash, cfg.seed);
  std::ostringstream msg;
  msg << "train-pg: steps=" << res.steps << " final_omega="
      << (res.trace.empty() ? 0.0 : res.trace.back().omega);
  return msg.str();
}

// scheme comparison on one topology: slots + violations + loss under the
// NGM (all pairs), CHG and IFG graphs
struct SchemeOutcome {
  int slots;
  int violations;
  double loss_rate;
};

SchemeOutcome evaluate_assignment(const ExperimentConfig& cfg,
                                  const Network& net,
                                  const SlotAssignment& assign,
                                  uint64_t sim_seed) {
  const ReliabilityReport report =
      simulate_periods(net, cfg.radio, assign, cfg.eval.periods, sim_seed);
  long success = 0;
  for (int s : report.successes) success += s;
  return {assign.num_slots, report.violations(cfg.radio.reliability_target),
          1.0 - double(success) / (double(report.periods) * net.num_stas())};
}

std::string stage_eval_static(const ExperimentConfig& cfg) {
  require_stage(cfg, "train-es", "eval-static");
  const NgmModels models = load_models(cfg);

  OnlineConfig ocfg = cfg.online;
  ocfg.mobility = false;

  std::vector<std::pair<int, OnlineResult>> runs;
  CsvWriter cmp(cfg.output_dir / "static_comparison.csv", comment_line(cfg),
                {"topology", "scheme", "slots", "violations", "loss_rate"});
  for (int t = 0; t < cfg.eval.topologies; ++t) {
    const uint64_t net_seed = topology_seed(cfg, t);
    OnlineResult res = run_online(cfg.radio, models, ocfg, net_seed);
    runs.push_back({t, res});

    // scheme comparison against the heuristics on the same topology
    const Network net = generate_network(cfg.radio, net_seed);
    const auto states = measure_states(net, cfg.radio);
    const auto emb = embed_all(models.senn, states, cfg.radio);
    const PairIndicators ind = pair_indicators(net, cfg.radio);
    const uint64_t sim_seed = derive_rng(net_seed, Sub::Eval, 77).next();

    const auto pairs = all_ordered_pairs(net.num_stas());
    const auto preds = predict_pairs(models.pred, emb, pairs);
    Graph ngm_a = Graph::empty(net.num_stas());
    for (size_t p = 0; p < pairs.size(); ++p) {
      const auto f = edge_features(net, cfg.radio, pairs[p].first,
                                   pairs[p].second, preds[p]);
      ngm_a.set(pairs[p].first, pairs[p].second,
                uint8_t(egnn_edge(models.egnn_spec, models.egnn, f)));
    }
    const auto report_row = [&](const std::string& scheme,
                                const SlotAssignment& assign) {
      const SchemeOutcome o = evaluate_assignment(cfg, net, assign, sim_seed);
      cmp.row({std::to_string(t), scheme, std::to_string(o.slots),
               std::to_string(o.violations), CsvWriter::num(o.loss_rate)});
      return o;
    };
    report_row("ngm-b", res.last_assignment);
    report_row("ngm-a", greedy_color(ngm_a));
    report_row("chg", greedy_color(chg_graph(ind)));
    report_row("ifg", greedy_color(ifg_graph(states)));

    if (t == 0) {
      // per-slot histogram and final assignment of the first topology
      const auto hist = per_slot_histogram(res.last_assignment,
                                           res.last_report,
                                           cfg.radio.reliability_target);
      CsvWriter hcsv(cfg.output_dir / "slot_histogram.csv", comment_line(cfg),
                     {"slot", "sta_count", "violations"});
      for (const auto& row : hist)
        hcsv.row({std::to_string(row.slot), std::to_string(row.sta_count),
                  std::to_string(row.violations)});
      CsvWriter acsv(cfg.output_dir / "assignment.csv", comment_line(cfg),
                     {"sta", "slot"});
      for (size_t i = 0; i < res.last_assignment.slot_of.size(); ++i)
        acsv.row({std::to_string(i),
                  std::to_string(res.last_assignment.slot_of[i])});
    }
  }
  write_rounds_csv(cfg.output_dir / "static_rounds.csv", cfg, runs);
  write_json(cfg.output_dir / "static_timing.json", timing_json(runs));
  double mean_slots = 0.0;
  for (const auto& [t, r] : runs) mean_slots += r.mean_slots;
  mean_slots /= std::max<size_t>(1, runs.size());
  std::ostringstream msg;
  msg << "eval-static: topologies=" << cfg.eval.topologies
      << " mean_slots=" << mean_slots;
  return msg.str();
}

std::string stage_eval_mobile(const ExperimentConfig& cfg) {
  require_stage(cfg, "train-es", "eval-mobile");
  const NgmModels models = load_models(cfg);

  struct Scheme {
    const char* name;
    PairMode mode;
    bool augment;
  };
  const Scheme schemes[] = {{"ngm-b", PairMode::Bucketed, true},
                            {"no-comb", PairMode::Bucketed, false},
                            {"ngm-a", PairMode::AllPairs, false}};

  nlohmann::json summary;
  std::vector<std::pair<int, OnlineResult>> all_runs;
  for (const auto& scheme : schemes) {
    OnlineConfig ocfg = cfg.online;
    ocfg.mobility = true;
    ocfg.mode = scheme.mode;
    ocfg.augment = scheme.augment;
    std::vector<std::pair<int, OnlineResult>> runs;
    double loss_sum = 0.0, slot_sum = 0.0;
    for (int t = 0; t < cfg.eval.topologies; ++t) {
      OnlineResult res = run_online(cfg.radio, models, ocfg, topology_seed(cfg, t));
      loss_sum += res.packet_loss_rate;
      slot_sum += res.mean_slots;
      runs.push_back({t, res});
      all_runs.push_back({t, std::move(res)});
    }
    write_rounds_csv(cfg.output_dir /
                         ("mobile_rounds_" + std::string(scheme.name) + ".csv"),
                     cfg, runs);
    summary[scheme.name] = {
        {"mean_loss_rate", loss_sum / cfg.eval.topologies},
        {"mean_slots", slot_sum / cfg.eval.topologies}};
  }
  write_json(cfg.output_dir / "mobile_summary.json", summary);
  write_json(cfg.output_dir / "mobile_timing.json", timing_json(all_runs));
  std::ostringstream msg;
  msg << "eval-mobile: loss ngm-b=" << summary["ngm-b"]["mean_loss_rate"]
      << " no-comb=" << summary["no-comb"]["mean_loss_rate"]
      << " ngm-a=" << summary["ngm-a"]["mean_loss_rate"];
  return msg.str();
}

std::string stage_report(const ExperimentConfig& cfg) {
  const nlohmann::json doc = build_report(cfg);
  write_json(cfg.output_dir / "report.json", doc);
  return "report: wrote report.json";
}

}  // namespace

NgmModels load_models(const ExperimentConfig& cfg, bool need_egnn) {
  NgmModels models;
  models.senn = load_senn(cfg);
  models.pred = predictors_from_checkpoint(
      load_checkpoint(ckpt_path(cfg, "pretrain-pred")));
  models.dhf =
      dhf_from_checkpoint(load_checkpoint(ckpt_path(cfg, "train-dhf")));
  if (need_egnn) {
    const CheckpointMap nets = load_checkpoint(ckpt_path(cfg, "train-es"));
    auto it = nets.find("EGNN");
    if (it == nets.end())
      throw UserError("train-es checkpoint is missing network EGNN");
    models.egnn = ParamVector::zeros(dense_layout(models.egnn_spec));
    models.egnn.values = it->second.data;
    if (models.egnn.size() != models.egnn.layout->total)
      throw UserError("EGNN checkpoint payload size mismatch");
  } else {
    models.egnn = ParamVector::zeros(dense_layout(models.egnn_spec));
  }
  return models;
}

std::string run_stage(const std::string& name, const ExperimentConfig& cfg,
                      bool force) {
  if (std::find(kStageNames.begin(), kStageNames.end(), name) ==
      kStageNames.end())
    throw UserError("unknown stage: " + name);
  if (!force && stage_done(cfg, name))
    return name + ": already complete for config " + cfg.config_hash +
           " (use --force to rerun)";

  std::string summary;
  if (name == "gen-net") summary = stage_gen_net(cfg);
  else if (name == "pretrain-embed") summary = stage_pretrain_embed(cfg);
  else if (name == "pretrain-pred") summary = stage_pretrain_pred(cfg);
  else if (name == "train-dhf") summary = stage_train_dhf(cfg);
  else if (name == "dhf-grid") summary = stage_dhf_grid(cfg);
  else if (name == "train-es") summary = stage_train_es(cfg);
  else if (name == "train-pg") summary = stage_train_pg(cfg);
  else if (name == "eval-static") summary = stage_eval_static(cfg);
  else if (name == "eval-mobile") summary = stage_eval_mobile(cfg);
  else if (name == "report") summary = stage_report(cfg);
  mark_done(cfg, name);
  return summary;
}

namespace {

// trailing-window mean of one trace column
double csv_tail_mean(const fs::path& path, const std::string& column,
                     int window) {
  std::ifstream in(path);
  if (!in) throw UserError("missing artifact " + path.string());
  std::string line;
  std::getline(in, line);  // comment
  std::getline(in, line);  // header
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int col = -1;
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) col = static_cast<int>(i);
  if (col < 0)
    throw UserError("artifact " + path.string() + " lacks column " + column);
  std::vector<double> values;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int i = 0; i <= col; ++i) std::getline(ss, cell, ',');
    values.push_back(std::stod(cell));
  }
  if (values.empty()) return 0.0;
  const int n = std::min<int>(window, static_cast<int>(values.size()));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += values[values.size() - 1 - i];
  return sum / n;
}

}  // namespace

nlohmann::json build_report(const ExperimentConfig& cfg) {
  nlohmann::json doc;
  doc["config_hash"] = cfg.config_hash;
  doc["seed"] = cfg.seed;
  std::vector<std::string> missing;

  auto have = [&](const fs::path& p) {
    if (fs::exists(p)) return true;
    missing.push_back(p.string());
    return false;
  };

  const fs::path out = cfg.output_dir;
  if (have(out / "es_trace.csv") && have(out / "pg_trace.csv")) {
    const double es_omega = csv_tail_mean(out / "es_trace.csv", "omega", 100);
    const double pg_omega = csv_tail_mean(out / "pg_trace.csv", "omega", 100);
    doc["es_vs_pg"] = {
        {"es_omega", es_omega},
        {"pg_omega", pg_omega},
        {"ratio", pg_omega > 0 ? es_omega / pg_omega : es_omega / 1e-6}};
  }

  if (have(out / "static_comparison.csv")) {
    std::ifstream in(out / "static_comparison.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    struct Acc { double slots = 0, viol = 0, loss = 0; int n = 0; };
    std::map<std::string, Acc> by_scheme;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string topology, scheme, slots, viol, loss;
      std::getline(ss, topology, ',');
      std::getline(ss, scheme, ',');
      std::getline(ss, slots, ',');
      std::getline(ss, viol, ',');
      std::getline(ss, loss, ',');
      auto& acc = by_scheme[scheme];
      acc.slots += std::stod(slots);
      acc.viol += std::stod(viol);
      acc.loss += std::stod(loss);
      acc.n += 1;
    }
    nlohmann::json slots;
    for (auto& [scheme, acc] : by_scheme)
      slots[scheme] = {{"mean_slots", acc.slots / acc.n},
                       {"mean_violations", acc.viol / acc.n},
                       {"mean_loss_rate", acc.loss / acc.n}};
    if (by_scheme.count("ngm-b") && by_scheme.count("chg") &&
        by_scheme.count("ifg")) {
      const double ngm = by_scheme["ngm-b"].slots / by_scheme["ngm-b"].n;
      const double chg = by_scheme["chg"].slots / by_scheme["chg"].n;
      const double ifg = by_scheme["ifg"].slots / by_scheme["ifg"].n;
      const double viol_pct =
          100.0 * (by_scheme["ngm-b"].viol / by_scheme["ngm-b"].n) /
          cfg.radio.num_stas;
      slots["ratio_vs_chg"] = ngm / chg;
      slots["ratio_vs_ifg"] = ngm / ifg;
      slots["ngm_violation_pct"] = viol_pct;
      slots["slot_savings_ok"] =
          ngm <= 0.85 * chg && ngm <= 0.85 * ifg && viol_pct <= 2.0;
    }
    doc["slots"] = slots;
  }

  if (have(out / "dhf_grid.csv")) {
    std::ifstream in(out / "dhf_grid.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::map<std::pair<int, int>, std::pair<double, int>> eff;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string psi, ups, seed, frac, recall, e;
      std::getline(ss, psi, ',');
      std::getline(ss, ups, ',');
      std::getline(ss, seed, ',');
      std::getline(ss, frac, ',');
      std::getline(ss, recall, ',');
      std::getline(ss, e, ',');
      auto& cell = eff[{std::stoi(psi), std::stoi(ups)}];
      cell.first += std::stod(e);
      cell.second += 1;
    }
    double best = -1e300;
    int best_psi = 0, best_ups = 0;
    for (auto& [key, cell] : eff) {
      const double mean = cell.first / cell.second;
      if (mean > best) {
        best = mean;
        best_psi = key.first;
        best_ups = key.second;
      }
    }
    doc["dhf_grid"] = {{"best_psi", best_psi},
                       {"best_upsilon", best_ups},
                       {"best_efficiency", best}};
  }

  if (have(out / "mobile_summary.json"))
    doc["mobility"] = read_json(out / "mobile_summary.json");

  if (have(out / "static_timing.json")) {
    const nlohmann::json timing = read_json(out / "static_timing.json");
    double tau = 0.0;
    int n = 0;
    for (const auto& r : timing.at("rounds")) {
      tau += r.at("tau_ms").get<double>();
      ++n;
    }
    doc["timing"]["static_mean_tau_ms"] = n ? tau / n : 0.0;
  }

  if (!missing.empty()) {
    if (doc.size() <= 2)  // nothing but config_hash/seed aggregated
      throw UserError("report: no evaluation artifacts found; missing: " +
                      [&] {
                        std::string all;
                        for (const auto& m : missing)
                          all += (all.empty() ? "" : ", ") + m;
                        return all;
                      }());
    doc["missing_artifacts"] = missing;
  }
  return doc;
}

}  // namespace scneugm
