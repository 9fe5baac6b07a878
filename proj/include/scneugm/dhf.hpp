#pragma once

#include <array>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "scneugm/predictors.hpp"

namespace scneugm {

inline constexpr int kHashBits = 30;  // Lambda

// +-1 code per STA; sign(0) maps to +1.
struct HashCode {
  std::array<int8_t, kHashBits> bits;
};

struct DhfModel {
  DenseSpec spec{{kEmbedDim, 30, 30, 30, 30, kHashBits}, Activation::GELU,
                 Activation::Tanh};
  ParamVector params;
  double lambda = 0.2;
  EmbedNorm norm;  // fitted at training start, frozen afterwards

  static DhfModel init(uint64_t seed);
};

// Tanh-relaxed code used by the training losses.
std::vector<double> relaxed_code(const DhfModel& model,
                                 const EmbeddingVector& v);
HashCode binarize(const std::vector<double>& relaxed);
HashCode hash_code(const DhfModel& model, const EmbeddingVector& v);
std::vector<HashCode> hash_all(const DhfModel& model,
                               const std::vector<EmbeddingVector>& emb);

// Mean over ordered pairs of the squared gap between normalized code
// similarity (<b_i,b_j> + Lambda)/(2 Lambda) and the pair label.
// dcodes (optional, K x Lambda) accumulates gradients w.r.t. the codes.
double similarity_loss(const std::vector<std::vector<double>>& codes,
                       const PairIndicators& ind,
                       std::vector<std::vector<double>>* dcodes);

// (1/K^2) * || C C^T - I ||_F^2 with C the Lambda x K matrix of codes as
// columns; penalizes correlation between bit positions.
double correlation_loss(const std::vector<std::vector<double>>& codes,
                        std::vector<std::vector<double>>* dcodes);

struct DhfTrainConfig {
  int steps = 10000;
  double lr = 1e-3;
  double lambda = 0.2;
  int num_stas = 100;
};

struct DhfTrainResult {
  DhfModel model;
  // trace cols: similarity, correlation, total, norm_similarity, norm_corr
  std::vector<TraceRow> trace;
};

DhfTrainResult train_dhf(const RadioConfig& radio, const SennModel& senn,
                         const DhfTrainConfig& cfg, uint64_t seed);

// Ordered STA pairs needing edge generation; closed under order swap.
struct PairSet {
  std::unordered_set<uint64_t> keys;

  static uint64_t key(int i, int j) {
    return (uint64_t(uint32_t(i)) << 32) | uint32_t(j);
  }
  void add(int i, int j) {
    keys.insert(key(i, j));
    keys.insert(key(j, i));
  }
  bool contains(int i, int j) const { return keys.count(key(i, j)) > 0; }
  size_t size() const { return keys.size(); }
  // sorted (i, j) list for deterministic iteration
  std::vector<std::pair<int, int>> sorted() const;
};

struct BatchRound {
  std::vector<int> positions;
  std::vector<int8_t> query;
  std::vector<int> added;
};

// Training-time subset selection: repeat {draw Psi positions and a random
// +-1 query; add matching STAs} until k_prime collected (insertion order
// kept, truncated). Psi = 0 degenerates to a uniform draw, which is also the
// fallback after too many consecutive empty rounds.
std::vector<int> batch_select(const std::vector<HashCode>& codes, int psi,
                              int k_prime, uint64_t seed,
                              std::vector<BatchRound>* trace = nullptr);

// Inference-time candidate pairs: Upsilon hash tables over Psi random bit
// positions each; all ordered intra-bucket pairs, unioned across tables.
PairSet bucket_pairs(const std::vector<HashCode>& codes, int psi, int upsilon,
                     uint64_t seed);

CheckpointMap dhf_to_checkpoint(const DhfModel& model);
DhfModel dhf_from_checkpoint(const CheckpointMap& nets);

}  // namespace scneugm
