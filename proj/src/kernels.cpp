#include "deepo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deepo/error.hpp"

namespace deepo {
namespace {

void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::Dimension, std::string(name) + " must be square and non-empty, got " +
                                          std::to_string(m.rows()) + "x" +
                                          std::to_string(m.cols()));
  }
}

void require_symmetric(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tolerances::kSymmetry * scale) {
    throw Error(ErrorKind::NotSymmetric,
                "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
}

}  // namespace

double spectral_radius(const Matrix& a) {
  require_square(a, "matrix");
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double norm2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& w) {
  require_square(a, "a_cl");
  require_square(w, "w");
  const Eigen::Index n = a.rows();
  if (w.rows() != n) {
    throw Error(ErrorKind::Dimension, "lyapunov: a_cl and w differ in size");
  }
  const double rho = spectral_radius(a);
  if (!(rho < 1.0 - tolerances::kStabilityMargin)) {
    throw Error(ErrorKind::Unstable, "lyapunov: spectral radius " + std::to_string(rho));
  }

  // Column-major vec: vec(aΣaᵀ) = (a ⊗ a) vec(Σ).
  const Eigen::Index nn = n * n;
  Matrix lhs = Matrix::Identity(nn, nn);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index cp = 0; cp < n; ++cp) {
      lhs.block(c * n, cp * n, n, n) -= a(c, cp) * a;
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(w.data(), nn);
  const Eigen::PartialPivLU<Matrix> lu(lhs);
  Vector sol = lu.solve(rhs);
  // One refinement sweep keeps the residual at rounding level near the boundary.
  sol += lu.solve(rhs - lhs * sol);

  Matrix sigma = Eigen::Map<const Matrix>(sol.data(), n, n);
  return symmetrized(sigma);
}

double modified_dare_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                              const Matrix& r, double beta, const Matrix& h) {
  const Matrix s = r + b.transpose() * h * b;
  const Matrix bha = b.transpose() * h * a;
  const Matrix res = a.transpose() * h * a - beta * beta * h -
                     bha.transpose() * s.ldlt().solve(bha) + q;
  return norm2(res);
}

Matrix solve_modified_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                           const Matrix& r, double beta) {
  require_square(a, "a");
  require_square(q, "q");
  require_square(r, "r");
  const Eigen::Index n = a.rows();
  if (b.rows() != n || q.rows() != n || r.rows() != b.cols()) {
    throw Error(ErrorKind::Dimension, "dare: inconsistent shapes of a, b, q, r");
  }
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "dare: beta must lie in (0, 1]");
  }
  require_symmetric(q);
  require_symmetric(r);
  if (Eigen::LLT<Matrix>(r).info() != Eigen::Success) {
    throw Error(ErrorKind::NotPD, "dare: r is not positive definite");
  }

  // Dividing by β² turns the equation into a standard DARE for (a/β, b)
  // with state weight q/β² and unchanged r.
  const Matrix as = a / beta;
  const Matrix qs = q / (beta * beta);
  const Matrix bt = b.transpose();

  Matrix h = qs;
  for (int it = 0; it < tolerances::kDareMaxIterations; ++it) {
    const Matrix bha = bt * h * as;
    const Matrix s = r + bt * h * b;
    Matrix next = as.transpose() * h * as - bha.transpose() * s.ldlt().solve(bha) + qs;
    next = symmetrized(next);
    if (!next.allFinite()) break;

    const double step = norm2(next - h);
    h = std::move(next);
    // The residual of the previous iterate equals β²·step; test the new one exactly.
    if (beta * beta * step <= 0.1 * tolerances::kDareResidual * std::max(1.0, norm2(h))) {
      const double res = modified_dare_residual(a, b, q, r, beta, h);
      if (res <= tolerances::kDareResidual * std::max(1.0, norm2(h))) {
        return h;
      }
    }
  }
  throw Error(ErrorKind::NoConvergence, "dare: value iteration did not reach tolerance");
}

Matrix pseudoinverse(const Matrix& m) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                     std::numeric_limits<double>::epsilon() * s(0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double min_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().tail(1)(0);
}

double min_eigenvalue_symmetric(const Matrix& m) {
  require_square(m, "matrix");
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue_symmetric(const Matrix& m) {
  require_square(m, "matrix");
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(m.rows() - 1);
}

}  // namespace deepo
