#pragma once

#include <utility>
#include <vector>

#include "scneugm/senn.hpp"

namespace scneugm {

// PCNN / PHNN heads scoring how likely an ordered STA pair is contending or
// hidden, from the concatenated embeddings (v_i, v_j).
struct PredictorModel {
  DenseSpec pcnn_spec{{2 * kEmbedDim, 50, 50, 1}, Activation::ReLU,
                      Activation::Sigmoid};
  DenseSpec phnn_spec{{2 * kEmbedDim, 50, 50, 1}, Activation::ReLU,
                      Activation::Sigmoid};
  ParamVector pcnn;
  ParamVector phnn;
  EmbedNorm norm;  // fitted at training start, frozen afterwards

  static PredictorModel init(uint64_t seed);
};

struct PairPrediction {
  double contending;
  double hidden;
};

PairPrediction predict_pair(const PredictorModel& model,
                            const EmbeddingVector& vi,
                            const EmbeddingVector& vj);

struct PredictorTrainConfig {
  int steps = 2000;
  double lr = 1e-3;
  int num_stas = 100;
  bool balance = true;  // 1:1 positive/negative subsampling per step
};

struct PredictorPretrainResult {
  PredictorModel model;
  // trace cols: loss_pc, loss_ph, norm_pc, norm_ph
  std::vector<TraceRow> trace;
};

// Supervised pre-training against simulator ground truth. The embeddings
// come from the (frozen) SENN. Binary cross-entropy in bits, minimized.
PredictorPretrainResult pretrain_predictors(const RadioConfig& radio,
                                            const SennModel& senn,
                                            const PredictorTrainConfig& cfg,
                                            uint64_t seed);

CheckpointMap predictors_to_checkpoint(const PredictorModel& model);
PredictorModel predictors_from_checkpoint(const CheckpointMap& nets);

}  // namespace scneugm
