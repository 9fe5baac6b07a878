#pragma once

#include <functional>
#include <vector>

#include "scneugm/dhf.hpp"
#include "scneugm/graph.hpp"

namespace scneugm {

// Inputs to the edge generator for an ordered pair (i, j): the three path
// losses of the pair and the two predicted indicators.
struct EdgeFeatures {
  double s_i_own;    // loss from i to its own AP
  double s_i_cross;  // loss from i to j's AP, clamped at s_max
  double s_j_own;    // loss from j to its own AP
  double pred_c;
  double pred_h;
};

struct EgnnSpec : DenseSpec {
  EgnnSpec() {
    dims = {5, 50, 50, 1};
    hidden = Activation::ReLU;
    output = Activation::Sigmoid;
  }
};

EdgeFeatures edge_features(const Network& net, const RadioConfig& cfg, int i,
                           int j, const PairPrediction& pred);

// Sigmoid edge score in [0, 1]; losses standardized by /100 first.
double egnn_score(const DenseSpec& spec, const ParamVector& params,
                  const EdgeFeatures& f, DenseCache* cache = nullptr);

// Rounded edge value; 0.5 rounds up to 1.
int egnn_edge(const DenseSpec& spec, const ParamVector& params,
              const EdgeFeatures& f);

// Trained model stack used online and during ES training.
struct NgmModels {
  SennModel senn;
  PredictorModel pred;
  DhfModel dhf;
  EgnnSpec egnn_spec;
  ParamVector egnn;  // may be empty until the ES stage ran
};

// Pairwise predictor outputs for the given ordered pairs.
std::vector<PairPrediction> predict_pairs(
    const PredictorModel& model, const std::vector<EmbeddingVector>& emb,
    const std::vector<std::pair<int, int>>& pairs);

// Edges for the listed ordered pairs; everything else stays 0.
Graph build_graph(int n, const std::vector<std::pair<int, int>>& pairs,
                  const std::function<EdgeFeatures(int, int)>& features,
                  const DenseSpec& spec, const ParamVector& params);

std::vector<std::pair<int, int>> all_ordered_pairs(int n);

}  // namespace scneugm
