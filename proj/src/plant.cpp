#include "deepo/plant.hpp"

#include <cmath>

#include "deepo/error.hpp"

namespace deepo {

void PlantModel::validate() const {
  if (A.rows() != A.cols() || A.rows() == 0 || B.rows() != A.rows() || B.cols() == 0) {
    throw Error(ErrorKind::Dimension, "plant: A must be n×n and B n×m");
  }
  if (!std::isfinite(sigma_w) || sigma_w < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "plant: sigma_w must be finite and non-negative");
  }
}

Vector plant_step(const PlantModel& p, const Vector& x, const Vector& u, Rng& rng) {
  if (x.size() != p.states() || u.size() != p.inputs()) {
    throw Error(ErrorKind::Dimension, "plant_step: state or input size mismatch");
  }
  Vector next = p.A * x + p.B * u;
  if (p.sigma_w > 0.0) next += rng.normal_vector(p.states(), p.sigma_w);
  return next;
}

}  // namespace deepo
