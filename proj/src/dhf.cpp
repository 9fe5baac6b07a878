#include "scneugm/dhf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "scneugm/util.hpp"

namespace scneugm {

DhfModel DhfModel::init(uint64_t seed) {
  DhfModel m;
  m.params = ParamVector::zeros(dense_layout(m.spec));
  Rng rng = derive_rng(seed, {uint64_t(Sub::ParamInit), 3});
  init_dense(m.spec, "", m.params, rng);
  return m;
}

std::vector<double> relaxed_code(const DhfModel& model,
                                 const EmbeddingVector& v) {
  const EmbeddingVector in = model.norm.apply(v);
  std::vector<double> out(kHashBits);
  dense_forward(model.spec, model.params, "",
                std::span<const double>(in.data(), in.size()), out);
  return out;
}

HashCode binarize(const std::vector<double>& relaxed) {
  HashCode code;
  for (int n = 0; n < kHashBits; ++n)
    code.bits[n] = relaxed[n] < 0.0 ? -1 : 1;
  return code;
}

HashCode hash_code(const DhfModel& model, const EmbeddingVector& v) {
  return binarize(relaxed_code(model, v));
}

std::vector<HashCode> hash_all(const DhfModel& model,
                               const std::vector<EmbeddingVector>& emb) {
  std::vector<HashCode> codes(emb.size());
  parallel_for(static_cast<int>(emb.size()),
               [&](int i) { codes[i] = hash_code(model, emb[i]); });
  return codes;
}

double similarity_loss(const std::vector<std::vector<double>>& codes,
                       const PairIndicators& ind,
                       std::vector<std::vector<double>>* dcodes) {
  const int k = static_cast<int>(codes.size());
  if (k < 2) throw std::invalid_argument("similarity_loss: need K >= 2");
  const double pairs = double(k) * double(k - 1);
  double loss = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (int n = 0; n < kHashBits; ++n) dot += codes[i][n] * codes[j][n];
      const double sim = (dot + kHashBits) / (2.0 * kHashBits);
      const double gap = sim - double(ind.either(i, j));
      loss += gap * gap / pairs;
      if (dcodes) {
        const double coef = 2.0 * gap / (pairs * 2.0 * kHashBits);
        for (int n = 0; n < kHashBits; ++n) {
          (*dcodes)[i][n] += coef * codes[j][n];
          (*dcodes)[j][n] += coef * codes[i][n];
        }
      }
    }
  }
  return loss;
}

double correlation_loss(const std::vector<std::vector<double>>& codes,
                        std::vector<std::vector<double>>* dcodes) {
  const int k = static_cast<int>(codes.size());
  if (k < 1) throw std::invalid_argument("correlation_loss: need K >= 1");
  // M = C C^T - I over bit positions (Lambda x Lambda)
  std::vector<double> m(size_t(kHashBits) * kHashBits, 0.0);
  for (int a = 0; a < kHashBits; ++a)
    for (int b = 0; b < kHashBits; ++b) {
      double acc = 0.0;
      for (int s = 0; s < k; ++s) acc += codes[s][a] * codes[s][b];
      m[size_t(a) * kHashBits + b] = acc - (a == b ? 1.0 : 0.0);
    }
  const double scale = 1.0 / (double(k) * double(k));
  double loss = 0.0;
  for (double v : m) loss += v * v;
  loss *= scale;
  if (dcodes) {
    // dL/dC = (4/K^2) M C, per code column
    for (int s = 0; s < k; ++s)
      for (int a = 0; a < kHashBits; ++a) {
        double acc = 0.0;
        for (int b = 0; b < kHashBits; ++b)
          acc += m[size_t(a) * kHashBits + b] * codes[s][b];
        (*dcodes)[s][a] += 4.0 * scale * acc;
      }
  }
  return loss;
}

DhfTrainResult train_dhf(const RadioConfig& radio, const SennModel& senn,
                         const DhfTrainConfig& cfg, uint64_t seed) {
  RadioConfig net_cfg = radio;
  net_cfg.num_stas = cfg.num_stas;
  DhfTrainResult result;
  result.model = DhfModel::init(seed);
  result.model.lambda = cfg.lambda;
  double init_sim = -1.0, init_cor = -1.0;

  for (int step = 1; step <= cfg.steps; ++step) {
    const Network net =
        generate_network(net_cfg, derive_rng(seed, Sub::TrainNet, step).next());
    const auto states = measure_states(net, net_cfg);
    const auto emb = embed_all(senn, states, net_cfg);
    if (step == 1) result.model.norm = EmbedNorm::fit(emb);
    const PairIndicators ind = pair_indicators(net, net_cfg);
    const int k = net.num_stas();

    std::vector<std::vector<double>> codes(k);
    std::vector<DenseCache> caches(k);
    for (int i = 0; i < k; ++i) {
      const EmbeddingVector in = result.model.norm.apply(emb[i]);
      codes[i].resize(kHashBits);
      dense_forward(result.model.spec, result.model.params, "",
                    std::span<const double>(in.data(), in.size()),
                    codes[i], &caches[i]);
    }

    std::vector<std::vector<double>> dcodes(
        k, std::vector<double>(kHashBits, 0.0));
    const double sim = similarity_loss(codes, ind, &dcodes);
    std::vector<std::vector<double>> dcor(
        k, std::vector<double>(kHashBits, 0.0));
    const double cor = correlation_loss(codes, &dcor);
    for (int i = 0; i < k; ++i)
      for (int n = 0; n < kHashBits; ++n)
        dcodes[i][n] += cfg.lambda * dcor[i][n];

    if (init_sim < 0.0) { init_sim = sim; init_cor = cor; }
    const double total = sim + cfg.lambda * cor;
    if (total > 10.0 * (init_sim + cfg.lambda * init_cor))
      throw std::runtime_error("train_dhf diverged at step " +
                               std::to_string(step));

    ParamVector grads = ParamVector::zeros(result.model.params.layout);
    for (int i = 0; i < k; ++i)
      dense_backward(result.model.spec, result.model.params, "", caches[i],
                     dcodes[i], grads, {});
    result.model.params = sgd_step(result.model.params, grads, cfg.lr);
    result.trace.push_back(
        {step, {sim, cor, total, sim / init_sim, cor / init_cor}});
  }
  return result;
}

std::vector<std::pair<int, int>> PairSet::sorted() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(keys.size());
  for (uint64_t key : keys)
    out.push_back({int(key >> 32), int(key & 0xffffffffULL)});
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<int> draw_positions(int psi, Rng& rng) {
  std::vector<int> all(kHashBits);
  for (int i = 0; i < kHashBits; ++i) all[i] = i;
  for (int t = 0; t < psi; ++t) {
    const int r = t + int(rng.below(uint64_t(kHashBits - t)));
    std::swap(all[t], all[r]);
  }
  all.resize(psi);
  return all;
}

void uniform_fill(const std::vector<HashCode>& codes, int k_prime,
                  std::vector<int>& selected, std::vector<uint8_t>& member,
                  Rng& rng) {
  const int k = static_cast<int>(codes.size());
  std::vector<int> rest;
  for (int i = 0; i < k; ++i)
    if (!member[i]) rest.push_back(i);
  while (static_cast<int>(selected.size()) < k_prime && !rest.empty()) {
    const size_t r = rng.below(rest.size());
    std::swap(rest[r], rest.back());
    selected.push_back(rest.back());
    member[rest.back()] = 1;
    rest.pop_back();
  }
}

}  // namespace

std::vector<int> batch_select(const std::vector<HashCode>& codes, int psi,
                              int k_prime, uint64_t seed,
                              std::vector<BatchRound>* trace) {
  const int k = static_cast<int>(codes.size());
  if (psi < 0 || psi > kHashBits)
    throw std::invalid_argument("batch_select: psi out of range");
  if (k_prime > k)
    throw std::invalid_argument("batch_select: k_prime exceeds K");
  Rng rng = derive_rng(seed, Sub::Batch);
  std::vector<int> selected;
  std::vector<uint8_t> member(k, 0);
  if (psi == 0) {
    uniform_fill(codes, k_prime, selected, member, rng);
    return selected;
  }
  constexpr int kMaxEmptyRounds = 64;
  int empty_rounds = 0;
  while (static_cast<int>(selected.size()) < k_prime) {
    const std::vector<int> pos = draw_positions(psi, rng);
    std::vector<int8_t> query(psi);
    for (int t = 0; t < psi; ++t) query[t] = rng.below(2) ? 1 : -1;
    BatchRound round;
    round.positions = pos;
    round.query = query;
    for (int i = 0; i < k && static_cast<int>(selected.size()) < k_prime; ++i) {
      if (member[i]) continue;
      bool match = true;
      for (int t = 0; t < psi && match; ++t)
        match = codes[i].bits[pos[t]] == query[t];
      if (match) {
        selected.push_back(i);
        member[i] = 1;
        round.added.push_back(i);
      }
    }
    if (trace) trace->push_back(round);
    empty_rounds = round.added.empty() ? empty_rounds + 1 : 0;
    if (empty_rounds >= kMaxEmptyRounds) {
      uniform_fill(codes, k_prime, selected, member, rng);
      break;
    }
  }
  return selected;
}

PairSet bucket_pairs(const std::vector<HashCode>& codes, int psi, int upsilon,
                     uint64_t seed) {
  if (psi < 1 || psi > kHashBits)
    throw std::invalid_argument("bucket_pairs: psi out of range");
  if (upsilon < 1) throw std::invalid_argument("bucket_pairs: upsilon >= 1");
  const int k = static_cast<int>(codes.size());
  PairSet pairs;
  for (int table = 0; table < upsilon; ++table) {
    Rng rng = derive_rng(seed, Sub::Bucket, uint64_t(table));
    const std::vector<int> pos = draw_positions(psi, rng);
    std::unordered_map<uint32_t, std::vector<int>> buckets;
    for (int i = 0; i < k; ++i) {
      uint32_t sub = 0;
      for (int t = 0; t < psi; ++t)
        sub = (sub << 1) | uint32_t(codes[i].bits[pos[t]] > 0);
      buckets[sub].push_back(i);
    }
    for (const auto& [sub, members] : buckets)
      for (size_t a = 0; a < members.size(); ++a)
        for (size_t b = a + 1; b < members.size(); ++b)
          pairs.add(members[a], members[b]);
  }
  return pairs;
}

CheckpointMap dhf_to_checkpoint(const DhfModel& m) {
  CheckpointMap nets;
  nlohmann::json spec = dense_spec_json(m.spec);
  spec["lambda"] = m.lambda;
  spec["input_norm"] = m.norm.to_json();
  nets["DHF"] = {spec, m.params.values};
  return nets;
}

DhfModel dhf_from_checkpoint(const CheckpointMap& nets) {
  auto it = nets.find("DHF");
  if (it == nets.end())
    throw std::runtime_error("checkpoint is missing network DHF");
  DhfModel m;
  m.params = ParamVector::zeros(dense_layout(m.spec));
  m.params.values = it->second.data;
  if (m.params.size() != m.params.layout->total)
    throw std::runtime_error("DHF checkpoint payload size mismatch");
  m.lambda = it->second.spec.value("lambda", 0.2);
  if (it->second.spec.contains("input_norm"))
    m.norm = EmbedNorm::from_json(it->second.spec.at("input_norm"));
  return m;
}

}  // namespace scneugm
