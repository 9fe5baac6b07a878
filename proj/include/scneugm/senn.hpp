#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "scneugm/checkpoint.hpp"
#include "scneugm/network.hpp"
#include "scneugm/nn.hpp"

namespace scneugm {

inline constexpr int kEmbedDim = 5;

using EmbeddingVector = std::array<double, kEmbedDim>;

// Affine input standardization for networks consuming embeddings; fitted
// once when training starts and frozen into the model thereafter.
struct EmbedNorm {
  std::array<double, kEmbedDim> mean{};
  std::array<double, kEmbedDim> scale{1.0, 1.0, 1.0, 1.0, 1.0};

  static EmbedNorm fit(const std::vector<EmbeddingVector>& emb);
  EmbeddingVector apply(const EmbeddingVector& v) const {
    EmbeddingVector out;
    for (int d = 0; d < kEmbedDim; ++d) out[d] = (v[d] - mean[d]) / scale[d];
    return out;
  }
  nlohmann::json to_json() const;
  static EmbedNorm from_json(const nlohmann::json& j);
};

// Encoder: per-AP triple -> SENNI -> stacked LSTM -> SENNO -> 5-dim v.
// Decoder: v fed to every first-layer LSTM block -> linear head -> triples.
struct SennSpec {
  DenseSpec senni{{3, 15, 15, 15}, Activation::GELU, Activation::GELU};
  LstmSpec enc_lstm{15, 15, 2};
  DenseSpec senno{{15, kEmbedDim}, Activation::None, Activation::None};
  LstmSpec dec_lstm{kEmbedDim, 15, 2};
  DenseSpec dec_head{{15, 3}, Activation::None, Activation::None};
};

struct SennModel {
  SennSpec spec;
  ParamVector enc;  // senni.* enc.* senno.*
  ParamVector dec;  // dlstm.* dhead.*

  static SennModel init(uint64_t seed);
};

// Station triples standardized before the encoder: loss/100, x/side, y/side.
std::vector<std::vector<double>> standardize_state(const StationState& state,
                                                   const RadioConfig& cfg);

EmbeddingVector embed(const SennModel& model, const StationState& state,
                      const RadioConfig& cfg);

std::vector<EmbeddingVector> embed_all(const SennModel& model,
                                       const std::vector<StationState>& states,
                                       const RadioConfig& cfg);

// Reconstructs `length` raw-unit (path-loss dB, ap x, ap y) triples from an
// embedding.
std::vector<std::array<double, 3>> decode(const SennModel& model,
                                          const EmbeddingVector& v, int length);

// Per-network reconstruction loss: (1/K) sum_k sum_a ||s_k(a) - s~_k(a)||^2
// over the raw-unit triples (the encoder consumes standardized inputs; the
// decoder head reconstructs in dB and meters). Accumulates encoder/decoder
// gradients when the grad pointers are given.
double autoencoder_loss(const SennModel& model,
                        const std::vector<StationState>& states,
                        const RadioConfig& cfg, ParamVector* enc_grads,
                        ParamVector* dec_grads);

struct TrainConfig {
  int steps = 2000;
  double lr = 1e-3;
  int num_stas = 100;
  double clip_norm = 1500.0;  // global gradient-norm cap; 0 disables
};

struct TraceRow {
  int step;
  std::vector<double> cols;
};

struct PretrainResult {
  SennModel model;
  std::vector<TraceRow> trace;  // step, loss, normalized_loss
};

PretrainResult pretrain_autoencoder(const RadioConfig& radio,
                                    const TrainConfig& cfg, uint64_t seed);

CheckpointMap senn_to_checkpoint(const SennModel& model);
SennModel senn_from_checkpoint(const CheckpointMap& nets);

}  // namespace scneugm
