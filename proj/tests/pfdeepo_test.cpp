#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "deepo/error.hpp"
#include "deepo/harness.hpp"
#include "deepo/pfdeepo.hpp"

using namespace deepo;

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

struct Bench {
  ExperimentConfig cfg = benchmark_config();
  DataSet ds0 = generate_offline(cfg.plant, cfg.offline_samples, cfg.sigma_u, cfg.seed);
  Matrix k0 = Matrix::Zero(2, 4);

  Matrix gain_for(double beta) const {
    const Matrix h = solve_modified_dare(cfg.plant.A, cfg.plant.B, cfg.weights.Q, cfg.weights.R,
                                         beta);
    return modified_dare_gain(cfg.plant.A, cfg.plant.B, h, cfg.weights.R);
  }
};

PfdeepoConfig pf_config(int horizon, std::uint64_t seed = 1) {
  PfdeepoConfig c;
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

double lambda_min(const Matrix& k, const Matrix& b, const StabilityCertificate& cert,
                  const CostWeights& w, double v) {
  return min_eigenvalue_symmetric(scaling_matrix(k, b, cert.H, w, v));
}

}  // namespace

TEST(PfdeepoConfig, Validation) {
  EXPECT_NO_THROW(pf_config(0).validate());
  const auto bad = [](auto mutate) {
    PfdeepoConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](PfdeepoConfig& c) { c.gamma = 0.0; }).validate(), Error);
  EXPECT_THROW(bad([](PfdeepoConfig& c) { c.delta = -1.0; }).validate(), Error);
  EXPECT_THROW(bad([](PfdeepoConfig& c) { c.eta = -1e-4; }).validate(), Error);
  EXPECT_THROW(bad([](PfdeepoConfig& c) { c.beta = 1.0; }).validate(), Error);
  EXPECT_THROW(bad([](PfdeepoConfig& c) { c.v_cap_lo = 1.2; }).validate(), Error);
  EXPECT_THROW(bad([](PfdeepoConfig& c) { c.v_cap_hi = 0.9; }).validate(), Error);
  EXPECT_THROW(bad([](PfdeepoConfig& c) { c.horizon = -2; }).validate(), Error);
}

TEST(StabilityInterval, ScalarGoldenRatioExact) {
  const Matrix one = Matrix::Identity(1, 1);
  const CostWeights w = CostWeights::identity(1, 1);
  const StabilityCertificate cert =
      stability_interval(Matrix::Constant(1, 1, -1.0 / kPhi), one, one, w, 1.0, {0.0, 10.0});
  EXPECT_NEAR(cert.H(0, 0), kPhi, 1e-9);
  EXPECT_NEAR(cert.v_lo, 0.0, 1e-5);
  EXPECT_NEAR(cert.v_hi, 1.0 + std::sqrt(5.0), 1e-5);
  EXPECT_FALSE(cert.hi_capped);
}

TEST(StabilityInterval, ZeroGainReturnsCaps) {
  Bench s;
  const StabilityCertificate cert = stability_interval(
      s.k0, s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, 0.98, {0.5, 1.5});
  EXPECT_EQ(cert.v_lo, 0.5);
  EXPECT_EQ(cert.v_hi, 1.5);
  EXPECT_TRUE(cert.lo_capped);
  EXPECT_TRUE(cert.hi_capped);
}

TEST(StabilityInterval, RejectsBadCaps) {
  Bench s;
  EXPECT_THROW(stability_interval(s.k0, s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, 0.98,
                                  {1.1, 1.5}),
               Error);
}

TEST(StabilityInterval, ContainsOneStrictly) {
  Bench s;
  for (double beta : {0.9, 0.95, 0.98, 1.0}) {
    const StabilityCertificate cert = stability_interval(
        s.gain_for(beta), s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, beta, {0.0, 10.0});
    EXPECT_LT(cert.v_lo, 1.0);
    EXPECT_GT(cert.v_hi, 1.0);
    EXPECT_GT(cert.h_min, 0.0);
  }
}

TEST(StabilityInterval, GridSoundAndConcave) {
  Bench s;
  const Matrix k = s.gain_for(0.98);
  const StabilityCertificate cert =
      stability_interval(k, s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, 0.98, {0.0, 10.0});
  std::vector<double> lam;
  for (int i = 0; i <= 100; ++i) {
    const double v = cert.v_lo + (cert.v_hi - cert.v_lo) * i / 100.0;
    lam.push_back(lambda_min(k, s.cfg.plant.B, cert, s.cfg.weights, v));
    EXPECT_GE(lam.back(), -1e-9) << "v = " << v;
  }
  for (std::size_t i = 1; i + 1 < lam.size(); ++i) {
    EXPECT_GE(lam[i], 0.5 * (lam[i - 1] + lam[i + 1]) - 1e-12);
  }
  if (!cert.hi_capped) {
    EXPECT_LT(lambda_min(k, s.cfg.plant.B, cert, s.cfg.weights, cert.v_hi + 0.05), 0.0);
  }
}

TEST(ExponentialBound, HoldsForUnitScaling) {
  Bench s;
  const Matrix k = s.gain_for(0.98);
  const StabilityCertificate cert =
      stability_interval(k, s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, 0.98, {0.5, 1.5});
  const std::vector<double> ones(200, 1.0);
  Rng rng(4, Stream::Scaling);
  for (int trial = 0; trial < 10; ++trial) {
    const BoundCheck check = verify_exponential_bound(s.cfg.plant.A, s.cfg.plant.B, k, cert,
                                                      rng.normal_vector(4, 1.0), ones, 200);
    EXPECT_TRUE(check.ok());
    EXPECT_LE(check.worst_bound_ratio, 1.0 + 1e-9);
  }
}

TEST(ExponentialBound, HoldsForRandomCertifiedScalings) {
  Bench s;
  const Matrix k = s.gain_for(0.98);
  const StabilityCertificate cert =
      stability_interval(k, s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, 0.98, {0.0, 10.0});
  Rng rng(5, Stream::Scaling);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(200);
    for (double& x : v) x = rng.uniform(cert.v_lo, cert.v_hi);
    EXPECT_TRUE(verify_exponential_bound(s.cfg.plant.A, s.cfg.plant.B, k, cert,
                                         rng.normal_vector(4, 1.0), v, 200)
                    .ok());
  }
}

TEST(ExponentialBound, DecrementFailsJustOutsideInterval) {
  Bench s;
  const Matrix k = s.gain_for(0.98);
  const StabilityCertificate cert =
      stability_interval(k, s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, 0.98, {0.0, 10.0});
  ASSERT_FALSE(cert.hi_capped);
  const double v_out = cert.v_hi + 0.05;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(
      scaling_matrix(k, s.cfg.plant.B, cert.H, s.cfg.weights, v_out));
  ASSERT_LT(eig.eigenvalues()(0), 0.0);
  const Vector x0 = eig.eigenvectors().col(0);
  const std::vector<double> v(1, v_out);
  const BoundCheck check =
      verify_exponential_bound(s.cfg.plant.A, s.cfg.plant.B, k, cert, x0, v, 1);
  EXPECT_FALSE(check.decrement_holds);
  EXPECT_EQ(check.first_violation, 1);
}

TEST(ExponentialBound, ScalarDecrementFailsJustOutsideInterval) {
  const Matrix one = Matrix::Identity(1, 1);
  const Matrix k = Matrix::Constant(1, 1, -1.0 / kPhi);
  const StabilityCertificate cert =
      stability_interval(k, one, one, CostWeights::identity(1, 1), 1.0, {0.0, 10.0});
  const std::vector<double> inside(1, cert.v_hi - 1e-3);
  const std::vector<double> outside(1, cert.v_hi + 0.05);
  EXPECT_TRUE(verify_exponential_bound(one, one, k, cert, Vector::Ones(1), inside, 1).ok());
  EXPECT_FALSE(
      verify_exponential_bound(one, one, k, cert, Vector::Ones(1), outside, 1).decrement_holds);
}

TEST(ExponentialBound, HoldsForSmallerDecayRate) {
  Bench s;
  Rng rng(6, Stream::Scaling);
  for (double beta : {0.7, 0.85, 0.98}) {
    const Matrix k = s.gain_for(beta);
    const StabilityCertificate cert =
        stability_interval(k, s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, beta, {0.5, 1.5});
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> v(100);
      for (double& x : v) x = rng.uniform(cert.v_lo, cert.v_hi);
      EXPECT_TRUE(verify_exponential_bound(s.cfg.plant.A, s.cfg.plant.B, k, cert,
                                           rng.normal_vector(4, 1.0), v, 100)
                      .ok())
          << "beta = " << beta;
    }
  }
}

TEST(ExponentialBound, RejectsShortScalingSequence) {
  Bench s;
  const StabilityCertificate cert = stability_interval(
      s.k0, s.cfg.plant.A, s.cfg.plant.B, s.cfg.weights, 0.98, {0.5, 1.5});
  const std::vector<double> v(3, 1.0);
  EXPECT_THROW(
      verify_exponential_bound(s.cfg.plant.A, s.cfg.plant.B, s.k0, cert, Vector::Ones(4), v, 4),
      Error);
}

TEST(Scaling, UniformDrawsCenteredOnInterval) {
  Rng rng(1, Stream::Scaling);
  const int draws = 1000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = rng.uniform(0.5, 1.5);
    ASSERT_GE(v, 0.5);
    ASSERT_LT(v, 1.5);
    sum += v;
  }
  const double se = 1.0 / std::sqrt(12.0 * draws);
  EXPECT_NEAR(sum / draws, 1.0, 3.0 * se);
}

TEST(PfdeepoAgent, FirstStepIsPlain) {
  Bench s;
  PfdeepoAgent agent(s.ds0, s.k0, s.cfg.weights, pf_config(10));
  EXPECT_GT(agent.gating_dk_norm(), 0.1);
  const Action a = agent.act(Vector::Constant(4, 3.0));
  EXPECT_EQ(a.branch, ControlBranch::Plain);
  EXPECT_EQ(a.v, 1.0);
}

TEST(PfdeepoAgent, FreezesNearEquilibrium) {
  Bench s;
  Matrix k(2, 4);
  k << 0.1, -0.1, 0.1, 0.0, -0.1, 0.0, -0.1, -0.1;
  PfdeepoAgent agent(s.ds0, k, s.cfg.weights, pf_config(10));
  const Vector x = Vector::Constant(4, 0.04);
  ASSERT_LE(x.norm(), 0.1);
  const Action a = agent.act(x);
  EXPECT_EQ(a.branch, ControlBranch::Plain);
  const Outcome o = agent.observe(s.cfg.plant.A * x + s.cfg.plant.B * a.u);
  EXPECT_FALSE(o.updated);
  EXPECT_EQ(agent.gain(), k);
  EXPECT_EQ(agent.data().samples(), s.ds0.samples());
  EXPECT_EQ(agent.gating_dk_norm(), 0.0);
}

TEST(PfdeepoAgent, ObserveWithoutActThrows) {
  Bench s;
  PfdeepoAgent agent(s.ds0, s.k0, s.cfg.weights, pf_config(10));
  EXPECT_THROW(agent.observe(Vector::Zero(4)), Error);
}

TEST(RunPfdeepo, BranchesAreExclusive) {
  Bench s;
  const ExperimentConfig& cfg = s.cfg;
  int scaled = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const TraceLog log = run_pfdeepo(cfg.plant, s.ds0, s.k0, cfg.weights,
                                     pf_config(100, seed), cfg.disturbance());
    ASSERT_EQ(log.records.size(), 101u);
    for (std::size_t i = 0; i + 1 < log.records.size(); ++i) {
      const TraceRecord& r = log.records[i];
      const bool gate = r.dk_norm <= cfg.pfdeepo.delta && r.x.norm() > cfg.pfdeepo.gamma;
      if (gate) {
        ++scaled;
        EXPECT_EQ(r.branch, ControlBranch::Scaled);
        EXPECT_TRUE(r.certified);
        EXPECT_GE(r.v, cfg.pfdeepo.v_cap_lo);
        EXPECT_LE(r.v, cfg.pfdeepo.v_cap_hi);
        EXPECT_LE((r.u - r.v * (r.K * r.x)).norm(), 1e-12 * std::max(1.0, r.u.norm()));
      } else {
        EXPECT_EQ(r.branch, ControlBranch::Plain);
        EXPECT_EQ(r.v, 1.0);
        EXPECT_EQ(r.u, r.K * r.x);
      }
      if (r.x.norm() <= cfg.pfdeepo.gamma) {
        EXPECT_FALSE(r.updated);
        EXPECT_EQ(log.records[i + 1].K, r.K);
      }
      if (!r.updated) EXPECT_EQ(log.records[i + 1].K, r.K);
    }
  }
  EXPECT_GT(scaled, 0);
}

TEST(RunPfdeepo, DeterministicForFixedSeed) {
  Bench s;
  const TraceLog a = run_pfdeepo(s.cfg.plant, s.ds0, s.k0, s.cfg.weights, pf_config(60, 3),
                                 s.cfg.disturbance());
  const TraceLog b = run_pfdeepo(s.cfg.plant, s.ds0, s.k0, s.cfg.weights, pf_config(60, 3),
                                 s.cfg.disturbance());
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].x, b.records[i].x);
    EXPECT_EQ(a.records[i].u, b.records[i].u);
    EXPECT_EQ(a.records[i].v, b.records[i].v);
  }
}

TEST(RunPfdeepo, NeverProbes) {
  Bench s;
  const TraceLog log = run_pfdeepo(s.cfg.plant, s.ds0, s.k0, s.cfg.weights, pf_config(100),
                                   s.cfg.disturbance());
  for (const TraceRecord& r : log.records) EXPECT_NE(r.branch, ControlBranch::Probe);
}
