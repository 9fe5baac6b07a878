#include "scneugm/ngm.hpp"

#include <algorithm>

#include "scneugm/util.hpp"

namespace scneugm {

EdgeFeatures edge_features(const Network& net, const RadioConfig& cfg, int i,
                           int j, const PairPrediction& pred) {
  const double s_max = cfg.s_max();
  EdgeFeatures f;
  f.s_i_own = net.assoc_loss(i);
  f.s_i_cross = std::min(net.loss(i, net.assoc_ap[j]), s_max);
  f.s_j_own = net.assoc_loss(j);
  f.pred_c = pred.contending;
  f.pred_h = pred.hidden;
  return f;
}

double egnn_score(const DenseSpec& spec, const ParamVector& params,
                  const EdgeFeatures& f, DenseCache* cache) {
  const double in[5] = {f.s_i_own / 100.0, f.s_i_cross / 100.0,
                        f.s_j_own / 100.0, f.pred_c, f.pred_h};
  std::vector<double> out(1);
  dense_forward(spec, params, "", std::span<const double>(in, 5), out, cache);
  return out[0];
}

int egnn_edge(const DenseSpec& spec, const ParamVector& params,
              const EdgeFeatures& f) {
  return egnn_score(spec, params, f) >= 0.5 ? 1 : 0;
}

std::vector<PairPrediction> predict_pairs(
    const PredictorModel& model, const std::vector<EmbeddingVector>& emb,
    const std::vector<std::pair<int, int>>& pairs) {
  std::vector<PairPrediction> preds(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), [&](int p) {
    preds[p] = predict_pair(model, emb[pairs[p].first], emb[pairs[p].second]);
  });
  return preds;
}

Graph build_graph(int n, const std::vector<std::pair<int, int>>& pairs,
                  const std::function<EdgeFeatures(int, int)>& features,
                  const DenseSpec& spec, const ParamVector& params) {
  Graph g = Graph::empty(n);
  std::vector<uint8_t> edges(pairs.size(), 0);
  parallel_for(static_cast<int>(pairs.size()), [&](int p) {
    edges[p] = uint8_t(egnn_edge(spec, params, features(pairs[p].first,
                                                        pairs[p].second)));
  });
  for (size_t p = 0; p < pairs.size(); ++p)
    g.set(pairs[p].first, pairs[p].second, edges[p]);
  return g;
}

std::vector<std::pair<int, int>> all_ordered_pairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(size_t(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) pairs.push_back({i, j});
  return pairs;
}

}  // namespace scneugm
