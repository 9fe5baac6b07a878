#pragma once

#include <cstdint>
#include <initializer_list>

namespace scneugm {

// Substream tags. One master seed fans out to named streams so subsystems
// (topology, backoff, decoding, mobility, ...) stay independently replayable.
enum class Sub : uint64_t {
  Topology = 1,
  Backoff = 2,
  Decode = 3,
  Mobility = 4,
  ParamInit = 5,
  EsSample = 6,
  Batch = 7,
  Bucket = 8,
  TrainNet = 9,
  PgSample = 10,
  Heading = 11,
  Eval = 12,
};

// xoshiro256++ seeded through splitmix64. Self-contained so streams are
// bit-identical across platforms and across serial/parallel execution.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next();
  // uniform in [0, 1)
  double uniform();
  double uniform(double lo, double hi);
  // uniform integer in [0, n), n >= 1
  uint64_t below(uint64_t n);
  // standard normal via Box-Muller (one spare cached)
  double normal();

 private:
  uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives a stream from (master, path...) by hashing the path into the seed.
Rng derive_rng(uint64_t master, std::initializer_list<uint64_t> path);

inline Rng derive_rng(uint64_t master, Sub sub) {
  return derive_rng(master, {static_cast<uint64_t>(sub)});
}
inline Rng derive_rng(uint64_t master, Sub sub, uint64_t index) {
  return derive_rng(master, {static_cast<uint64_t>(sub), index});
}

}  // namespace scneugm
