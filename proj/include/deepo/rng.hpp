#pragma once

// Seeded random streams with a fixed, documented derivation so that traces are
// reproducible bit-for-bit:
//
//   engine   std::mt19937_64 seeded by std::seed_seq{lo32(seed), hi32(seed), stream, index}
//   uniform  (next() >> 11) · 2⁻⁵³, in [0, 1)
//   normal   Box–Muller on u1 = 1 − uniform, u2 = uniform:
//            r = √(−2 ln u1); returns r·cos(2πu2), then caches r·sin(2πu2)
//
// Both the engine and seed_seq are fully specified by the C++ standard; the
// transforms above replace the implementation-defined std distributions.

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace deepo {

enum class Stream : std::uint32_t {
  Offline = 0,
  ProcessNoise = 1,
  Probing = 2,
  Scaling = 3,
  Disturbance = 4,
};

class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream, std::uint32_t index = 0);

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // N(0, 1)
  Eigen::VectorXd normal_vector(Eigen::Index size, double stddev);
  Eigen::VectorXd uniform_vector(Eigen::Index size, double lo, double hi);

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

}  // namespace deepo
