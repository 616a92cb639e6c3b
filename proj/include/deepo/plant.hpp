#pragma once

#include "deepo/kernels.hpp"
#include "deepo/rng.hpp"

namespace deepo {

/// Ground-truth plant x⁺ = Ax + Bu + ω, ω ~ N(0, σ_w² I). Only the simulator
/// sees these matrices.
struct PlantModel {
  Matrix A;
  Matrix B;
  double sigma_w = 0.0;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }

  /// Throws Dimension/InvalidArgument on malformed fields.
  void validate() const;
};

Vector plant_step(const PlantModel& p, const Vector& x, const Vector& u, Rng& rng);

}  // namespace deepo
