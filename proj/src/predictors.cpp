#include "scneugm/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scneugm {

namespace {

constexpr double kProbClamp = 1e-12;

std::vector<double> concat_pair(const EmbedNorm& norm,
                                const EmbeddingVector& vi,
                                const EmbeddingVector& vj) {
  const EmbeddingVector a = norm.apply(vi);
  const EmbeddingVector b = norm.apply(vj);
  std::vector<double> in(2 * kEmbedDim);
  std::copy(a.begin(), a.end(), in.begin());
  std::copy(b.begin(), b.end(), in.begin() + kEmbedDim);
  return in;
}

// BCE in bits with the prediction clamped away from {0,1}. dout is the
// gradient w.r.t. the head output.
double bce_bits(double pred, int label, double* dout) {
  const double p = std::clamp(pred, kProbClamp, 1.0 - kProbClamp);
  const double loss = label ? -std::log2(p) : -std::log2(1.0 - p);
  if (dout) {
    if (pred <= kProbClamp || pred >= 1.0 - kProbClamp)
      *dout = 0.0;  // clamped region
    else
      *dout = (label ? -1.0 / p : 1.0 / (1.0 - p)) / M_LN2;
  }
  return loss;
}

struct HeadBatch {
  double loss = 0.0;
  int count = 0;
};

// One optimization target: the negated log-likelihood summed over the
// given (pair, label) samples, in bits.
HeadBatch head_loss(const DenseSpec& spec, const ParamVector& params,
                    const EmbedNorm& norm,
                    const std::vector<EmbeddingVector>& emb,
                    const std::vector<std::pair<int, int>>& pairs,
                    const std::vector<int>& labels, ParamVector* grads) {
  HeadBatch batch;
  batch.count = static_cast<int>(pairs.size());
  if (batch.count == 0) return batch;
  const double scale = 1.0;
  for (size_t n = 0; n < pairs.size(); ++n) {
    const auto in = concat_pair(norm, emb[pairs[n].first], emb[pairs[n].second]);
    std::vector<double> out(1);
    DenseCache cache;
    dense_forward(spec, params, "", in, out, grads ? &cache : nullptr);
    double dout = 0.0;
    batch.loss += scale * bce_bits(out[0], labels[n], grads ? &dout : nullptr);
    if (grads) {
      std::vector<double> dvec{scale * dout};
      dense_backward(spec, params, "", cache, dvec, *grads, {});
    }
  }
  return batch;
}

}  // namespace

PredictorModel PredictorModel::init(uint64_t seed) {
  PredictorModel m;
  m.pcnn = ParamVector::zeros(dense_layout(m.pcnn_spec));
  m.phnn = ParamVector::zeros(dense_layout(m.phnn_spec));
  Rng rng = derive_rng(seed, {uint64_t(Sub::ParamInit), 1});
  init_dense(m.pcnn_spec, "", m.pcnn, rng);
  Rng rng_h = derive_rng(seed, {uint64_t(Sub::ParamInit), 2});
  init_dense(m.phnn_spec, "", m.phnn, rng_h);
  return m;
}

PairPrediction predict_pair(const PredictorModel& model,
                            const EmbeddingVector& vi,
                            const EmbeddingVector& vj) {
  const auto in = concat_pair(model.norm, vi, vj);
  std::vector<double> oc(1), oh(1);
  dense_forward(model.pcnn_spec, model.pcnn, "", in, oc);
  dense_forward(model.phnn_spec, model.phnn, "", in, oh);
  return {oc[0], oh[0]};
}

PredictorPretrainResult pretrain_predictors(const RadioConfig& radio,
                                            const SennModel& senn,
                                            const PredictorTrainConfig& cfg,
                                            uint64_t seed) {
  RadioConfig net_cfg = radio;
  net_cfg.num_stas = cfg.num_stas;
  PredictorPretrainResult result;
  result.model = PredictorModel::init(seed);
  double init_pc = -1.0, init_ph = -1.0;
  int high_steps = 0;

  for (int step = 1; step <= cfg.steps; ++step) {
    const Network net =
        generate_network(net_cfg, derive_rng(seed, Sub::TrainNet, step).next());
    const auto states = measure_states(net, net_cfg);
    const auto emb = embed_all(senn, states, net_cfg);
    if (step == 1) result.model.norm = EmbedNorm::fit(emb);
    const PairIndicators ind = pair_indicators(net, net_cfg);
    const int k = net.num_stas();

    Rng pick = derive_rng(seed, Sub::Batch, step);
    auto make_samples = [&](auto label_of, std::vector<std::pair<int, int>>& ps,
                            std::vector<int>& ls) {
      std::vector<std::pair<int, int>> pos, neg;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          if (i == j) continue;
          (label_of(i, j) ? pos : neg).push_back({i, j});
        }
      if (!cfg.balance) {
        for (auto& p : pos) { ps.push_back(p); ls.push_back(1); }
        for (auto& p : neg) { ps.push_back(p); ls.push_back(0); }
        return;
      }
      // match the rarer class; fall back to a small negative batch if a
      // topology has no positives at all
      size_t n_pos = pos.size();
      size_t n_neg = std::min(neg.size(), n_pos > 0 ? n_pos : size_t(16));
      for (auto& p : pos) { ps.push_back(p); ls.push_back(1); }
      for (size_t t = 0; t < n_neg; ++t) {
        const size_t r = t + size_t(pick.below(neg.size() - t));
        std::swap(neg[t], neg[r]);
        ps.push_back(neg[t]);
        ls.push_back(0);
      }
    };

    std::vector<std::pair<int, int>> pc_pairs, ph_pairs;
    std::vector<int> pc_labels, ph_labels;
    make_samples([&](int i, int j) { return ind.c(i, j) != 0; }, pc_pairs,
                 pc_labels);
    make_samples([&](int i, int j) { return ind.h(i, j) != 0; }, ph_pairs,
                 ph_labels);

    ParamVector gc = ParamVector::zeros(result.model.pcnn.layout);
    ParamVector gh = ParamVector::zeros(result.model.phnn.layout);
    const auto bc = head_loss(result.model.pcnn_spec, result.model.pcnn,
                              result.model.norm, emb, pc_pairs, pc_labels, &gc);
    const auto bh = head_loss(result.model.phnn_spec, result.model.phnn,
                              result.model.norm, emb, ph_pairs, ph_labels, &gh);
    // the traced quantity is the likelihood over all ordered pairs (per
    // pair, in bits); the update batch stays class-balanced
    std::vector<std::pair<int, int>> every;
    std::vector<int> label_c, label_h;
    every.reserve(size_t(k) * (k - 1));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        if (i == j) continue;
        every.push_back({i, j});
        label_c.push_back(ind.c(i, j));
        label_h.push_back(ind.h(i, j));
      }
    const auto ac = head_loss(result.model.pcnn_spec, result.model.pcnn,
                              result.model.norm, emb, every, label_c, nullptr);
    const auto ah = head_loss(result.model.phnn_spec, result.model.phnn,
                              result.model.norm, emb, every, label_h, nullptr);
    const double mean_pc = ac.count ? ac.loss / ac.count : 0.0;
    const double mean_ph = ah.count ? ah.loss / ah.count : 0.0;
    if (init_pc < 0.0) { init_pc = mean_pc; init_ph = mean_ph; }
    // clamped confident-wrong pairs legitimately spike single steps; only a
    // sustained blow-up is divergence
    if (mean_pc > 10.0 * init_pc || mean_ph > 10.0 * init_ph) {
      if (++high_steps >= 20)
        throw std::runtime_error("pretrain_predictors diverged at step " +
                                 std::to_string(step));
    } else {
      high_steps = 0;
    }
    result.model.pcnn = sgd_step(result.model.pcnn, gc, cfg.lr);
    result.model.phnn = sgd_step(result.model.phnn, gh, cfg.lr);
    result.trace.push_back(
        {step, {mean_pc, mean_ph, mean_pc / init_pc, mean_ph / init_ph}});
  }
  return result;
}

CheckpointMap predictors_to_checkpoint(const PredictorModel& m) {
  CheckpointMap nets;
  nlohmann::json pc_spec = dense_spec_json(m.pcnn_spec);
  pc_spec["input_norm"] = m.norm.to_json();
  nets["PCNN"] = {pc_spec, m.pcnn.values};
  nets["PHNN"] = {dense_spec_json(m.phnn_spec), m.phnn.values};
  return nets;
}

PredictorModel predictors_from_checkpoint(const CheckpointMap& nets) {
  PredictorModel m;
  m.pcnn = ParamVector::zeros(dense_layout(m.pcnn_spec));
  m.phnn = ParamVector::zeros(dense_layout(m.phnn_spec));
  auto expect = [&nets](const char* name) -> const CheckpointNet& {
    auto it = nets.find(name);
    if (it == nets.end())
      throw std::runtime_error(std::string("checkpoint is missing network ") +
                               name);
    return it->second;
  };
  const CheckpointNet& pc = expect("PCNN");
  m.pcnn.values = pc.data;
  m.phnn.values = expect("PHNN").data;
  if (pc.spec.contains("input_norm"))
    m.norm = EmbedNorm::from_json(pc.spec.at("input_norm"));
  if (m.pcnn.size() != m.pcnn.layout->total ||
      m.phnn.size() != m.phnn.layout->total)
    throw std::runtime_error("predictor checkpoint payload size mismatch");
  return m;
}

}  // namespace scneugm
