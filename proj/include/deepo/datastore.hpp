#pragma once

#include <filesystem>
#include <iosfwd>

#include "deepo/kernels.hpp"

namespace deepo {

/// Growing record of inputs U0 (m×t), states X0 (n×t) and successor states X1 (n×t).
/// Column k of X1 is the observed successor of (X0 col k, U0 col k); columns need
/// not be consecutive in time.
struct DataSet {
  Matrix U0;
  Matrix X0;
  Matrix X1;

  DataSet() = default;
  DataSet(Matrix u0, Matrix x0, Matrix x1);
  /// Empty dataset with fixed dimensions and t = 0.
  static DataSet empty(Eigen::Index n, Eigen::Index m);

  Eigen::Index states() const { return X0.rows(); }
  Eigen::Index inputs() const { return U0.rows(); }
  Eigen::Index samples() const { return X0.cols(); }

  void push_back(const Vector& x, const Vector& u, const Vector& x_next);
};

/// Sample-covariance parametrization Φ = 𝒟𝒟ᵀ/t with 𝒟 = [U0; X0] and
/// X̄₁ = X1𝒟ᵀ/t. The first m rows of Φ are Ū₀, the last n rows are X̄₀.
struct CovParam {
  Matrix Phi;
  Matrix Xbar1;
  Eigen::Index t = 0;
  Eigen::Index m = 0;

  Eigen::Index states() const { return Xbar1.rows(); }
  Eigen::Index inputs() const { return m; }

  auto Ubar0() const { return Phi.topRows(m); }
  auto Xbar0() const { return Phi.bottomRows(Phi.rows() - m); }
};

/// Block-Hankel matrix of order l: block row i holds u_i … u_{i+t−l}.
Matrix build_hankel(const Matrix& u, Eigen::Index l);

/// Number of singular values above max(1e−8·σ_max, 1e−12).
Eigen::Index numeric_rank(const Matrix& m);

/// True iff the order-l Hankel matrix of u has full row rank m·l.
bool is_persistently_exciting(const Matrix& u, Eigen::Index l);

/// 𝒟 = [U0; X0], inputs stacked above states.
Matrix build_D(const DataSet& ds);

CovParam covariance_param(const DataSet& ds);

/// Appends one sample to `ds` and applies the matching rank-one update
/// Φ' = (tΦ + ddᵀ)/(t+1), d = [u; x], to `cp` (and likewise for X̄₁).
void append_sample(CovParam& cp, DataSet& ds, const Vector& x, const Vector& u,
                   const Vector& x_next);

/// CSV with header `k,u1..um,x1..xn,x1next..xnnext`, one row per sample.
void write_dataset_csv(const DataSet& ds, std::ostream& out);
void write_dataset_csv(const DataSet& ds, const std::filesystem::path& path);
DataSet read_dataset_csv(std::istream& in);
DataSet read_dataset_csv(const std::filesystem::path& path);

namespace tolerances {
inline constexpr double kRankRelative = 1e-8;
inline constexpr double kRankAbsolute = 1e-12;
}  // namespace tolerances

}  // namespace deepo
