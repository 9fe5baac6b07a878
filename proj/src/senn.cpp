#include "scneugm/senn.hpp"

#include <cmath>
#include <stdexcept>

#include "scneugm/util.hpp"

namespace scneugm {

namespace {

// partial-saturation init for the recurrent blocks: with unit-scale features
// a plain Glorot LSTM leaves the embedding spread too small for the decoder
// to pick up within the pre-training budget
constexpr double kLstmInitGain = 2.0;

LayoutPtr encoder_layout(const SennSpec& spec) {
  LayoutBuilder b;
  b.add_dense("senni.", spec.senni);
  b.add_lstm("enc.", spec.enc_lstm);
  b.add_dense("senno.", spec.senno);
  return b.build();
}

LayoutPtr decoder_layout(const SennSpec& spec) {
  LayoutBuilder b;
  b.add_lstm("dlstm.", spec.dec_lstm);
  b.add_dense("dhead.", spec.dec_head);
  return b.build();
}

}  // namespace

EmbedNorm EmbedNorm::fit(const std::vector<EmbeddingVector>& emb) {
  EmbedNorm norm;
  const double n = double(emb.size());
  for (int d = 0; d < kEmbedDim; ++d) {
    double mean = 0.0;
    for (const auto& v : emb) mean += v[d];
    mean /= n;
    double var = 0.0;
    for (const auto& v : emb) var += (v[d] - mean) * (v[d] - mean);
    norm.mean[d] = mean;
    norm.scale[d] = std::max(std::sqrt(var / n), 1e-6);
  }
  return norm;
}

nlohmann::json EmbedNorm::to_json() const {
  return nlohmann::json{{"mean", mean}, {"scale", scale}};
}

EmbedNorm EmbedNorm::from_json(const nlohmann::json& j) {
  EmbedNorm norm;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  for (int d = 0; d < kEmbedDim; ++d) {
    norm.mean[d] = mean.at(d);
    norm.scale[d] = scale.at(d);
  }
  return norm;
}

SennModel SennModel::init(uint64_t seed) {
  SennModel m;
  m.enc = ParamVector::zeros(encoder_layout(m.spec));
  m.dec = ParamVector::zeros(decoder_layout(m.spec));
  Rng rng = derive_rng(seed, Sub::ParamInit);
  init_dense(m.spec.senni, "senni.", m.enc, rng);
  init_lstm(m.spec.enc_lstm, "enc.", m.enc, rng, kLstmInitGain);
  init_dense(m.spec.senno, "senno.", m.enc, rng);
  init_lstm(m.spec.dec_lstm, "dlstm.", m.dec, rng, kLstmInitGain);
  init_dense(m.spec.dec_head, "dhead.", m.dec, rng);
  return m;
}

std::vector<std::vector<double>> standardize_state(const StationState& state,
                                                   const RadioConfig& cfg) {
  if (state.entries.empty())
    throw std::invalid_argument("standardize_state: empty station state");
  double prev = -1e300;
  std::vector<std::vector<double>> seq;
  seq.reserve(state.entries.size());
  // roughly centered, unit-variance features keep the LSTM responsive
  const double half = cfg.area_side / 2.0;
  const double coord_scale = cfg.area_side / 20.0;
  for (const auto& e : state.entries) {
    if (e.loss_db < prev)
      throw std::invalid_argument("standardize_state: entries not sorted");
    prev = e.loss_db;
    seq.push_back({(e.loss_db - 80.0) / 10.0, (e.ap_x - half) / coord_scale,
                   (e.ap_y - half) / coord_scale});
  }
  return seq;
}

namespace {

// encoder forward with optional caches for backprop
struct EncoderPass {
  std::vector<DenseCache> senni_caches;
  LstmCache lstm_cache;
  DenseCache senno_cache;
  std::vector<std::vector<double>> tokens;
  EmbeddingVector v{};
};

void encoder_forward(const SennModel& m,
                     const std::vector<std::vector<double>>& seq,
                     EncoderPass* pass, EmbeddingVector& v_out) {
  const int steps = static_cast<int>(seq.size());
  std::vector<std::vector<double>> tokens(steps, std::vector<double>(15));
  std::vector<DenseCache> caches(pass ? steps : 0);
  for (int t = 0; t < steps; ++t)
    dense_forward(m.spec.senni, m.enc, "senni.", seq[t], tokens[t],
                  pass ? &caches[t] : nullptr);
  std::vector<double> h_final;
  lstm_forward(m.spec.enc_lstm, m.enc, "enc.", tokens, nullptr, &h_final,
               pass ? &pass->lstm_cache : nullptr);
  std::vector<double> v(kEmbedDim);
  dense_forward(m.spec.senno, m.enc, "senno.", h_final, v,
                pass ? &pass->senno_cache : nullptr);
  for (int i = 0; i < kEmbedDim; ++i) v_out[i] = v[i];
  if (pass) {
    pass->senni_caches = std::move(caches);
    pass->tokens = std::move(tokens);
    pass->v = v_out;
  }
}

// dv -> encoder parameter grads
void encoder_backward(const SennModel& m, const EncoderPass& pass,
                      const std::vector<double>& dv, ParamVector& grads) {
  const int steps = static_cast<int>(pass.tokens.size());
  std::vector<double> dh_final(15, 0.0);
  dense_backward(m.spec.senno, m.enc, "senno.", pass.senno_cache, dv, grads,
                 dh_final);
  std::vector<std::vector<double>> dh_all(steps);
  dh_all[steps - 1] = dh_final;
  std::vector<std::vector<double>> dtokens;
  lstm_backward(m.spec.enc_lstm, m.enc, "enc.", pass.lstm_cache, dh_all, grads,
                &dtokens);
  for (int t = 0; t < steps; ++t)
    dense_backward(m.spec.senni, m.enc, "senni.", pass.senni_caches[t],
                   dtokens[t], grads, {});
}

struct DecoderPass {
  LstmCache lstm_cache;
  std::vector<DenseCache> head_caches;
  std::vector<std::vector<double>> hidden;
};

void decoder_forward(const SennModel& m, const EmbeddingVector& v, int length,
                     DecoderPass* pass,
                     std::vector<std::array<double, 3>>& out) {
  std::vector<std::vector<double>> seq(
      length, std::vector<double>(v.begin(), v.end()));
  std::vector<std::vector<double>> hidden;
  lstm_forward(m.spec.dec_lstm, m.dec, "dlstm.", seq, &hidden, nullptr,
               pass ? &pass->lstm_cache : nullptr);
  out.resize(length);
  if (pass) pass->head_caches.resize(length);
  for (int t = 0; t < length; ++t) {
    std::vector<double> triple(3);
    dense_forward(m.spec.dec_head, m.dec, "dhead.", hidden[t], triple,
                  pass ? &pass->head_caches[t] : nullptr);
    out[t] = {triple[0], triple[1], triple[2]};
  }
  if (pass) pass->hidden = std::move(hidden);
}

}  // namespace

EmbeddingVector embed(const SennModel& model, const StationState& state,
                      const RadioConfig& cfg) {
  EmbeddingVector v{};
  const auto seq = standardize_state(state, cfg);
  encoder_forward(model, seq, nullptr, v);
  return v;
}

std::vector<EmbeddingVector> embed_all(const SennModel& model,
                                       const std::vector<StationState>& states,
                                       const RadioConfig& cfg) {
  std::vector<EmbeddingVector> out(states.size());
  parallel_for(static_cast<int>(states.size()),
               [&](int i) { out[i] = embed(model, states[i], cfg); });
  return out;
}

std::vector<std::array<double, 3>> decode(const SennModel& model,
                                          const EmbeddingVector& v,
                                          int length) {
  if (length < 1) throw std::invalid_argument("decode: length must be >= 1");
  std::vector<std::array<double, 3>> out;
  decoder_forward(model, v, length, nullptr, out);
  return out;
}

double autoencoder_loss(const SennModel& model,
                        const std::vector<StationState>& states,
                        const RadioConfig& cfg, ParamVector* enc_grads,
                        ParamVector* dec_grads) {
  const int k = static_cast<int>(states.size());
  if (k == 0) throw std::invalid_argument("autoencoder_loss: no stations");
  const bool want_grads = enc_grads != nullptr;
  double total = 0.0;
  for (int s = 0; s < k; ++s) {
    const auto seq = standardize_state(states[s], cfg);
    const int len = static_cast<int>(seq.size());
    EncoderPass enc_pass;
    EmbeddingVector v{};
    encoder_forward(model, seq, want_grads ? &enc_pass : nullptr, v);
    DecoderPass dec_pass;
    std::vector<std::array<double, 3>> rec;
    decoder_forward(model, v, len, want_grads ? &dec_pass : nullptr, rec);

    std::vector<std::vector<double>> dtriples(len, std::vector<double>(3));
    for (int t = 0; t < len; ++t) {
      const auto& e = states[s].entries[t];
      const double raw[3] = {e.loss_db, e.ap_x, e.ap_y};
      for (int d = 0; d < 3; ++d) {
        const double err = rec[t][d] - raw[d];
        total += err * err / double(k);
        dtriples[t][d] = 2.0 * err / double(k);
      }
    }
    if (!want_grads) continue;

    // decoder head -> decoder LSTM -> embedding -> encoder
    std::vector<std::vector<double>> dh_all(len, std::vector<double>(15, 0.0));
    for (int t = 0; t < len; ++t)
      dense_backward(model.spec.dec_head, model.dec, "dhead.",
                     dec_pass.head_caches[t], dtriples[t], *dec_grads,
                     dh_all[t]);
    std::vector<std::vector<double>> dinputs;
    lstm_backward(model.spec.dec_lstm, model.dec, "dlstm.", dec_pass.lstm_cache,
                  dh_all, *dec_grads, &dinputs);
    std::vector<double> dv(kEmbedDim, 0.0);
    for (const auto& din : dinputs)
      for (int i = 0; i < kEmbedDim; ++i) dv[i] += din[i];
    encoder_backward(model, enc_pass, dv, *enc_grads);
  }
  return total;
}

PretrainResult pretrain_autoencoder(const RadioConfig& radio,
                                    const TrainConfig& cfg, uint64_t seed) {
  RadioConfig net_cfg = radio;
  net_cfg.num_stas = cfg.num_stas;
  PretrainResult result;
  result.model = SennModel::init(seed);
  double initial = -1.0;
  for (int step = 1; step <= cfg.steps; ++step) {
    const Network net =
        generate_network(net_cfg, derive_rng(seed, Sub::TrainNet, step).next());
    const auto states = measure_states(net, net_cfg);
    ParamVector enc_grads = ParamVector::zeros(result.model.enc.layout);
    ParamVector dec_grads = ParamVector::zeros(result.model.dec.layout);
    const double loss = autoencoder_loss(result.model, states, net_cfg,
                                         &enc_grads, &dec_grads);
    if (initial < 0.0) initial = loss;
    if (loss > 10.0 * initial)
      throw std::runtime_error("pretrain_autoencoder diverged at step " +
                               std::to_string(step));
    clip_norm(enc_grads, cfg.clip_norm);
    clip_norm(dec_grads, cfg.clip_norm);
    result.model.enc = sgd_step(result.model.enc, enc_grads, cfg.lr);
    result.model.dec = sgd_step(result.model.dec, dec_grads, cfg.lr);
    result.trace.push_back({step, {loss, loss / initial}});
  }
  return result;
}

CheckpointMap senn_to_checkpoint(const SennModel& m) {
  CheckpointMap nets;
  nets["SENNI"] = {dense_spec_json(m.spec.senni),
                   extract_prefixed(m.enc, "senni.")};
  nets["LSTM-enc"] = {lstm_spec_json(m.spec.enc_lstm),
                      extract_prefixed(m.enc, "enc.")};
  nets["SENNO"] = {dense_spec_json(m.spec.senno),
                   extract_prefixed(m.enc, "senno.")};
  nets["LSTM-dec"] = {lstm_spec_json(m.spec.dec_lstm),
                      extract_prefixed(m.dec, "dlstm.")};
  nets["SENND"] = {dense_spec_json(m.spec.dec_head),
                   extract_prefixed(m.dec, "dhead.")};
  return nets;
}

SennModel senn_from_checkpoint(const CheckpointMap& nets) {
  SennModel m;
  m.enc = ParamVector::zeros(encoder_layout(m.spec));
  m.dec = ParamVector::zeros(decoder_layout(m.spec));
  auto expect = [&nets](const char* name) -> const CheckpointNet& {
    auto it = nets.find(name);
    if (it == nets.end())
      throw std::runtime_error(std::string("checkpoint is missing network ") +
                               name);
    return it->second;
  };
  inject_prefixed(m.enc, "senni.", expect("SENNI").data);
  inject_prefixed(m.enc, "enc.", expect("LSTM-enc").data);
  inject_prefixed(m.enc, "senno.", expect("SENNO").data);
  inject_prefixed(m.dec, "dlstm.", expect("LSTM-dec").data);
  inject_prefixed(m.dec, "dhead.", expect("SENND").data);
  return m;
}

}  // namespace scneugm
