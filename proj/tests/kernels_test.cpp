#include <cmath>

#include <gtest/gtest.h>

#include "deepo/error.hpp"
#include "deepo/kernels.hpp"
#include "deepo/rng.hpp"

using namespace deepo;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) m.col(j) = rng.normal_vector(r, 1.0);
  return m;
}

Matrix random_stable(Rng& rng, Eigen::Index n, double radius) {
  Matrix a = random_matrix(rng, n, n);
  return a * (radius / spectral_radius(a));
}

// Σ = Σ_k a^k w (aᵀ)^k summed until the terms vanish.
Matrix lyapunov_series(const Matrix& a, const Matrix& w) {
  Matrix sum = Matrix::Zero(a.rows(), a.cols());
  Matrix term = w;
  for (int k = 0; k < 5000 && term.norm() > 1e-18; ++k) {
    sum += term;
    term = a * term * a.transpose();
  }
  return sum;
}

// Plain Riccati recursion on the unscaled equation, divided by β² each step.
Matrix dare_oracle(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r, double beta) {
  Matrix h = q;
  for (int it = 0; it < 200000; ++it) {
    const Matrix s = r + b.transpose() * h * b;
    const Matrix next = (a.transpose() * h * a -
                         a.transpose() * h * b * s.inverse() * b.transpose() * h * a + q) /
                        (beta * beta);
    const double diff = (next - h).norm();
    h = 0.5 * (next + next.transpose());
    if (diff < 1e-14 * std::max(1.0, h.norm())) break;
  }
  return h;
}

}  // namespace

TEST(Lyapunov, ZeroDynamicsReturnsW) {
  EXPECT_TRUE(solve_discrete_lyapunov(Matrix::Zero(2, 2), Matrix::Identity(2, 2))
                  .isApprox(Matrix::Identity(2, 2), 1e-14));
}

TEST(Lyapunov, ScalarSeries) {
  const Matrix s = solve_discrete_lyapunov(Matrix::Constant(1, 1, 0.5), Matrix::Identity(1, 1));
  EXPECT_NEAR(s(0, 0), 4.0 / 3.0, 1e-12);
}

TEST(Lyapunov, DiagonalSeries) {
  Matrix a = Matrix::Zero(2, 2);
  a.diagonal() << 0.5, 0.2;
  const Matrix s = solve_discrete_lyapunov(a, Matrix::Identity(2, 2));
  EXPECT_NEAR(s(0, 0), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(s(1, 1), 25.0 / 24.0, 1e-12);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-14);
}

TEST(Lyapunov, RandomStableMatchesSeriesAndFixedPoint) {
  Rng rng(11, Stream::Offline);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    const Matrix a = random_stable(rng, n, 0.9);
    const Matrix g = random_matrix(rng, n, n);
    const Matrix w = g * g.transpose();
    const Matrix s = solve_discrete_lyapunov(a, w);
    const double scale = std::max(1.0, norm2(s));
    EXPECT_LE(norm2(s - w - a * s * a.transpose()), 1e-10 * scale);
    EXPECT_LE(norm2(s - lyapunov_series(a, w)), 1e-9 * scale);
    EXPECT_EQ(s, s.transpose());
    EXPECT_GE(min_eigenvalue_symmetric(s), -1e-12 * scale);
  }
}

TEST(Lyapunov, RejectsUnstableAndMismatchedShapes) {
  try {
    solve_discrete_lyapunov(Matrix::Constant(1, 1, 1.0), Matrix::Identity(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unstable);
  }
  try {
    solve_discrete_lyapunov(Matrix::Zero(2, 2), Matrix::Identity(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
}

TEST(ModifiedDare, ZeroDynamicsGivesScaledQ) {
  Matrix q(2, 2);
  q << 2.0, 0.5, 0.5, 1.0;
  Rng rng(3, Stream::Offline);
  const Matrix b = random_matrix(rng, 2, 1);
  // With a = 0 the equation collapses to q − β²H = 0.
  for (double beta : {1.0, 0.7}) {
    EXPECT_TRUE(solve_modified_dare(Matrix::Zero(2, 2), b, q, Matrix::Identity(1, 1), beta)
                    .isApprox(q / (beta * beta), 1e-12));
  }
}

TEST(ModifiedDare, ScalarGoldenRatio) {
  const Matrix one = Matrix::Identity(1, 1);
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  EXPECT_NEAR(solve_modified_dare(one, one, one, one, 1.0)(0, 0), phi, 1e-9);
}

TEST(ModifiedDare, ScalarDiscounted) {
  // Positive root of 0.81h² − 0.83h − 1 = 0.
  const double oracle = (0.83 + std::sqrt(0.83 * 0.83 + 4.0 * 0.81)) / (2.0 * 0.81);
  const Matrix one = Matrix::Identity(1, 1);
  const double h = solve_modified_dare(Matrix::Constant(1, 1, 0.8), one, one, one, 0.9)(0, 0);
  EXPECT_NEAR(h, oracle, 1e-9);
  EXPECT_NEAR(h, 1.7358922, 1e-7);
}

TEST(ModifiedDare, MatchesRecursionOracleOnRandomPairs) {
  Rng rng(5, Stream::Offline);
  for (int trial = 0; trial < 16; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    const Eigen::Index m = 1 + trial % 2;
    const Matrix a = random_matrix(rng, n, n) * 0.6;
    const Matrix b = random_matrix(rng, n, m);
    const Matrix gq = random_matrix(rng, n, n);
    const Matrix q = gq * gq.transpose() + Matrix::Identity(n, n);
    const Matrix r = Matrix::Identity(m, m) * 0.5;
    for (double beta : {1.0, 0.9}) {
      const Matrix h = solve_modified_dare(a, b, q, r, beta);
      const Matrix ref = dare_oracle(a, b, q, r, beta);
      EXPECT_LE(norm2(h - ref), 1e-8 * std::max(1.0, norm2(ref))) << "trial " << trial;
      EXPECT_LE(modified_dare_residual(a, b, q, r, beta, h), 1e-9 * std::max(1.0, norm2(h)));
      EXPECT_GE(min_eigenvalue_symmetric(h), 0.0);
    }
  }
}

TEST(ModifiedDare, ScalingIdentity) {
  Rng rng(7, Stream::Offline);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    const Matrix a = random_matrix(rng, n, n) * 0.5;
    const Matrix b = random_matrix(rng, n, 2);
    const Matrix q = Matrix::Identity(n, n) * 1.5;
    Matrix r(2, 2);
    r << 1.0, 0.2, 0.2, 0.8;
    const double beta = 0.75 + 0.02 * trial;
    const Matrix h1 = solve_modified_dare(a, b, q, r, beta);
    const Matrix h2 = solve_modified_dare(a / beta, b / beta, q / (beta * beta),
                                          r / (beta * beta), 1.0);
    EXPECT_LE(norm2(h1 - h2), 1e-8 * std::max(1.0, norm2(h1)));
  }
}

TEST(ModifiedDare, RejectsBadArguments) {
  const Matrix one = Matrix::Identity(1, 1);
  EXPECT_THROW(solve_modified_dare(one, one, one, one, 0.0), Error);
  EXPECT_THROW(solve_modified_dare(one, one, one, one, 1.5), Error);
  EXPECT_THROW(solve_modified_dare(one, one, one, -one, 1.0), Error);
  EXPECT_THROW(solve_modified_dare(Matrix::Identity(2, 2), one, one, one, 1.0), Error);
}

TEST(Pseudoinverse, Examples) {
  EXPECT_TRUE(pseudoinverse(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));
  Matrix m(2, 2);
  m << 2, 0, 0, 0;
  Matrix expect(2, 2);
  expect << 0.5, 0, 0, 0;
  EXPECT_TRUE(pseudoinverse(m).isApprox(expect));
}

TEST(Pseudoinverse, FullRowRankIsRightInverse) {
  Rng rng(13, Stream::Offline);
  const Matrix m = random_matrix(rng, 4, 6);
  const Matrix ref = m.transpose() * (m * m.transpose()).inverse();
  EXPECT_LE(norm2(pseudoinverse(m) - ref), 1e-10 * norm2(ref));
}

TEST(Pseudoinverse, PenroseConditionsOnFuzzedInputs) {
  Rng rng(17, Stream::Offline);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index r = 1 + trial % 5;
    const Eigen::Index c = 1 + (trial / 5) % 6;
    const Eigen::Index rank = 1 + trial % std::min(r, c);
    const Matrix m = random_matrix(rng, r, rank) * random_matrix(rng, rank, c);
    const Matrix p = pseudoinverse(m);
    const double s = std::max(1.0, norm2(m)) * std::max(1.0, norm2(p));
    EXPECT_LE(norm2(m * p * m - m), 1e-10 * s * norm2(m));
    EXPECT_LE(norm2(p * m * p - p), 1e-10 * s * norm2(p));
    EXPECT_LE(norm2(m * p - (m * p).transpose()), 1e-10 * s);
    EXPECT_LE(norm2(p * m - (p * m).transpose()), 1e-10 * s);
  }
}

TEST(SingularValues, Examples) {
  EXPECT_DOUBLE_EQ(min_singular_value(Matrix::Identity(4, 4)), 1.0);
  Matrix a(2, 2);
  a << 1, 0, 0, 0;
  EXPECT_NEAR(min_singular_value(a), 0.0, 1e-300);
  Matrix b(3, 2);
  b << 3, 0, 0, 2, 0, 0;
  EXPECT_NEAR(min_singular_value(b), 2.0, 1e-14);
  EXPECT_NEAR(norm2(b), 3.0, 1e-14);
}

TEST(SymmetricEigen, Examples) {
  EXPECT_NEAR(min_eigenvalue_symmetric(Matrix::Identity(2, 2)), 1.0, 1e-15);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 3, -1;
  EXPECT_NEAR(min_eigenvalue_symmetric(d), -1.0, 1e-15);
  EXPECT_NEAR(max_eigenvalue_symmetric(d), 3.0, 1e-15);
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  EXPECT_NEAR(min_eigenvalue_symmetric(m), 1.0, 1e-14);
}

TEST(SymmetricEigen, RejectsAsymmetric) {
  Matrix m(2, 2);
  m << 1, 1e-6, 0, 1;
  try {
    min_eigenvalue_symmetric(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotSymmetric);
  }
}

TEST(SpectralRadius, RotationHasUnitRadius) {
  Matrix r(2, 2);
  r << 0, -1, 1, 0;
  EXPECT_NEAR(spectral_radius(r), 1.0, 1e-14);
  EXPECT_NEAR(spectral_radius(0.5 * r), 0.5, 1e-14);
}
