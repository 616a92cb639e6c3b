#include "deepo/rng.hpp"

#include <cmath>
#include <numbers>

namespace deepo {
namespace {

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream),
                    index};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, Stream stream, std::uint32_t index)
    : engine_(make_engine(seed, stream, index)) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (cached_normal_) {
    const double z = *cached_normal_;
    cached_normal_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index size, double stddev) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = stddev * normal();
  return v;
}

Eigen::VectorXd Rng::uniform_vector(Eigen::Index size, double lo, double hi) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = uniform(lo, hi);
  return v;
}

}  // namespace deepo
