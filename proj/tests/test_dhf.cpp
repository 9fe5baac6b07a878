#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "scneugm/dhf.hpp"

using namespace scneugm;

namespace {

PairIndicators make_indicators(int k,
                               std::initializer_list<std::pair<int, int>> ones) {
  PairIndicators ind;
  ind.k = k;
  ind.contending.assign(size_t(k) * k, 0);
  ind.hidden.assign(size_t(k) * k, 0);
  for (auto [i, j] : ones) ind.contending[size_t(i) * k + j] = 1;
  return ind;
}

std::vector<HashCode> random_codes(int k, uint64_t seed) {
  Rng rng(seed);
  std::vector<HashCode> codes(k);
  for (auto& c : codes)
    for (auto& b : c.bits) b = rng.below(2) ? 1 : -1;
  return codes;
}

}  // namespace

TEST_CASE("zero-weight DHF binarizes sign(0) to +1") {
  DhfModel model;
  model.params = ParamVector::zeros(dense_layout(model.spec));
  const HashCode code = hash_code(model, {0.1, 0.2, 0.3, 0.4, 0.5});
  for (int8_t b : code.bits) CHECK(b == 1);
}

TEST_CASE("relaxed codes live in (-1,1) and binarization is their sign") {
  const DhfModel model = DhfModel::init(8);
  const EmbeddingVector v{0.4, -0.9, 1.3, 0.0, -0.2};
  const auto relaxed = relaxed_code(model, v);
  const HashCode code = binarize(relaxed);
  for (int n = 0; n < kHashBits; ++n) {
    CHECK(relaxed[n] > -1.0);
    CHECK(relaxed[n] < 1.0);
    CHECK(code.bits[n] == (relaxed[n] < 0.0 ? -1 : 1));
  }
}

TEST_CASE("similarity loss hits its closed-form corner cases") {
  std::vector<std::vector<double>> same(2, std::vector<double>(kHashBits, 1.0));
  // identical codes, label 1 -> 0
  CHECK(similarity_loss(same, make_indicators(2, {{0, 1}, {1, 0}}), nullptr) ==
        doctest::Approx(0.0));
  // identical codes, label 0 -> 1
  CHECK(similarity_loss(same, make_indicators(2, {}), nullptr) ==
        doctest::Approx(1.0));
  // opposite codes, label 0 -> 0
  std::vector<std::vector<double>> opposite = same;
  for (double& v : opposite[1]) v = -1.0;
  CHECK(similarity_loss(opposite, make_indicators(2, {}), nullptr) ==
        doctest::Approx(0.0));
}

TEST_CASE("correlation loss vanishes for orthonormal bit rows") {
  // codes as columns of the 30x30 identity
  std::vector<std::vector<double>> codes(kHashBits,
                                         std::vector<double>(kHashBits, 0.0));
  for (int s = 0; s < kHashBits; ++s) codes[s][s] = 1.0;
  CHECK(correlation_loss(codes, nullptr) == doctest::Approx(0.0));
  // K=1 stays finite
  std::vector<std::vector<double>> one(1, std::vector<double>(kHashBits, 0.5));
  CHECK(std::isfinite(correlation_loss(one, nullptr)));
}

TEST_CASE("dhf loss gradients match finite differences through the net") {
  const DhfModel base = DhfModel::init(3);
  const double lambda = 0.2;
  std::vector<EmbeddingVector> emb{{0.2, -0.5, 0.8, 0.1, -0.3},
                                   {0.6, 0.4, -0.2, -0.7, 0.5},
                                   {-0.4, 0.3, 0.9, 0.2, -0.6}};
  const PairIndicators ind = make_indicators(3, {{0, 1}, {1, 0}, {2, 0}});

  auto loss_of = [&](const ParamVector& q) {
    DhfModel m = base;
    m.params = q;
    std::vector<std::vector<double>> codes;
    for (const auto& v : emb) codes.push_back(relaxed_code(m, v));
    return similarity_loss(codes, ind, nullptr) +
           lambda * correlation_loss(codes, nullptr);
  };

  // analytic: loss grads w.r.t. codes, then through the dense net
  std::vector<std::vector<double>> codes;
  std::vector<DenseCache> caches(emb.size());
  for (size_t i = 0; i < emb.size(); ++i) {
    std::vector<double> out(kHashBits);
    dense_forward(base.spec, base.params, "",
                  std::span<const double>(emb[i].data(), emb[i].size()), out,
                  &caches[i]);
    codes.push_back(out);
  }
  std::vector<std::vector<double>> dcodes(
      emb.size(), std::vector<double>(kHashBits, 0.0));
  similarity_loss(codes, ind, &dcodes);
  std::vector<std::vector<double>> dcor(
      emb.size(), std::vector<double>(kHashBits, 0.0));
  correlation_loss(codes, &dcor);
  for (size_t i = 0; i < emb.size(); ++i)
    for (int n = 0; n < kHashBits; ++n) dcodes[i][n] += lambda * dcor[i][n];
  ParamVector grads = ParamVector::zeros(base.params.layout);
  for (size_t i = 0; i < emb.size(); ++i)
    dense_backward(base.spec, base.params, "", caches[i], dcodes[i], grads,
                   {});

  const double h = 1e-5;
  for (int i = 0; i < base.params.size(); ++i) {
    ParamVector up = base.params, dn = base.params;
    up.values[i] += h;
    dn.values[i] -= h;
    const double numeric = (loss_of(up) - loss_of(dn)) / (2.0 * h);
    const double tol = 1e-4 * std::max(std::abs(numeric), 1e-3) + 1e-7;
    CHECK(std::abs(numeric - grads.values[i]) <= tol);
  }
}

TEST_CASE("lambda=0 leaves only the similarity gradient") {
  const DhfModel base = DhfModel::init(3);
  std::vector<EmbeddingVector> emb{{0.2, -0.5, 0.8, 0.1, -0.3},
                                   {0.6, 0.4, -0.2, -0.7, 0.5}};
  const PairIndicators ind = make_indicators(2, {{0, 1}});
  std::vector<std::vector<double>> codes;
  for (const auto& v : emb) codes.push_back(relaxed_code(base, v));
  std::vector<std::vector<double>> with_zero(
      2, std::vector<double>(kHashBits, 0.0));
  similarity_loss(codes, ind, &with_zero);
  std::vector<std::vector<double>> cor_only(
      2, std::vector<double>(kHashBits, 0.0));
  correlation_loss(codes, &cor_only);
  for (int i = 0; i < 2; ++i)
    for (int n = 0; n < kHashBits; ++n) {
      const double combined = with_zero[i][n] + 0.0 * cor_only[i][n];
      CHECK(combined == with_zero[i][n]);
    }
}

TEST_CASE("short dhf training is reproducible and traces both losses") {
  RadioConfig radio;
  const SennModel senn = SennModel::init(2);
  DhfTrainConfig cfg;
  cfg.steps = 8;
  cfg.num_stas = 12;
  const DhfTrainResult a = train_dhf(radio, senn, cfg, 10);
  const DhfTrainResult b = train_dhf(radio, senn, cfg, 10);
  REQUIRE(a.trace.size() == 8);
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].cols[0] == b.trace[i].cols[0]);
    CHECK(a.trace[i].cols[2] ==
          doctest::Approx(a.trace[i].cols[0] + cfg.lambda * a.trace[i].cols[1]));
  }
}

TEST_CASE("batch_select: psi=0 uniform draw, audit trail, saturation") {
  const auto codes = random_codes(40, 5);

  // psi = 0: uniform selection of exactly k'
  const auto uniform = batch_select(codes, 0, 15, 7);
  CHECK(uniform.size() == 15);
  CHECK(std::set<int>(uniform.begin(), uniform.end()).size() == 15);

  // audit: every selected STA matched its round's query at its positions
  std::vector<BatchRound> trace;
  const auto picked = batch_select(codes, 5, 20, 9, &trace);
  CHECK(picked.size() == 20);
  std::set<int> seen;
  for (const auto& round : trace)
    for (int sta : round.added) {
      CHECK(seen.insert(sta).second);  // insertion order, no duplicates
      for (size_t t = 0; t < round.positions.size(); ++t)
        CHECK(codes[sta].bits[round.positions[t]] == round.query[t]);
    }
  CHECK(seen.size() == 20);

  // psi = Lambda with all-distinct codes: each round adds at most one
  std::vector<BatchRound> trace_full;
  const auto full = batch_select(codes, kHashBits, 6, 11, &trace_full);
  CHECK(full.size() == 6);
  for (const auto& round : trace_full) CHECK(round.added.size() <= 1);
}

TEST_CASE("batch_select falls back to uniform after empty rounds") {
  // identical codes and a huge query width: matches are all-or-nothing, so
  // empty rounds pile up until the uniform fallback completes the batch
  std::vector<HashCode> codes(6);
  for (auto& c : codes) c.bits.fill(1);
  const auto picked = batch_select(codes, kHashBits, 3, 13);
  CHECK(picked.size() == 3);
}

TEST_CASE("bucket_pairs: symmetry, identical codes, upsilon monotonicity") {
  const auto codes = random_codes(25, 21);
  const PairSet p1 = bucket_pairs(codes, 7, 4, 3);
  for (const auto& [i, j] : p1.sorted()) {
    CHECK(i != j);
    CHECK(p1.contains(j, i));
  }

  // identical codes always share every bucket at full width
  std::vector<HashCode> twins = random_codes(5, 2);
  twins[3] = twins[1];
  const PairSet p2 = bucket_pairs(twins, kHashBits, 1, 17);
  CHECK(p2.contains(1, 3));
  CHECK(p2.contains(3, 1));

  // tables share RNG draws, so fewer tables is always a subset
  const PairSet small = bucket_pairs(codes, 6, 3, 29);
  const PairSet large = bucket_pairs(codes, 6, 9, 29);
  for (uint64_t key : small.keys) CHECK(large.keys.count(key) == 1);

  // many 1-bit tables approach full coverage on random codes
  const auto few = random_codes(10, 8);
  const PairSet cover = bucket_pairs(few, 1, 200, 31);
  CHECK(cover.size() == size_t(10 * 9));
}

TEST_CASE("dhf checkpoint round trip") {
  const DhfModel model = DhfModel::init(64);
  const auto path = std::filesystem::temp_directory_path() / "dhf_ckpt.json";
  save_checkpoint(path, dhf_to_checkpoint(model), "beef", 64);
  const DhfModel loaded = dhf_from_checkpoint(load_checkpoint(path));
  CHECK(loaded.params.values == model.params.values);
  CHECK(loaded.lambda == doctest::Approx(model.lambda));
  std::filesystem::remove(path);
}
