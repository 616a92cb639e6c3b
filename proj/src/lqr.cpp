#include "deepo/lqr.hpp"

#include <string>

#include "deepo/error.hpp"

namespace deepo {

CostWeights::CostWeights(Matrix q, Matrix r) : Q(std::move(q)), R(std::move(r)) {
  if (Q.rows() != Q.cols() || R.rows() != R.cols() || Q.size() == 0 || R.size() == 0) {
    throw Error(ErrorKind::Dimension, "cost weights must be square and non-empty");
  }
  if (min_eigenvalue_symmetric(Q) <= 0.0 || min_eigenvalue_symmetric(R) <= 0.0) {
    throw Error(ErrorKind::NotPD, "cost weights must be positive definite");
  }
}

double closed_loop_cost(const Matrix& a, const Matrix& b, const Matrix& k, const CostWeights& w) {
  if (b.rows() != a.rows() || k.rows() != b.cols() || k.cols() != a.cols() ||
      w.Q.rows() != a.rows() || w.R.rows() != b.cols()) {
    throw Error(ErrorKind::Dimension, "closed_loop_cost: inconsistent shapes");
  }
  const Eigen::Index n = a.rows();
  const Matrix sigma = solve_discrete_lyapunov(a + b * k, Matrix::Identity(n, n));
  return ((w.Q + k.transpose() * w.R * k) * sigma).trace();
}

SystemEstimate ls_identify(const DataSet& ds) {
  const Eigen::Index n = ds.states();
  const Eigen::Index m = ds.inputs();
  const Matrix d = build_D(ds);
  if (ds.samples() < n + m || numeric_rank(d) < n + m) {
    throw Error(ErrorKind::RankDeficient,
                "ls_identify: rank([U0; X0]) < n+m with t = " + std::to_string(ds.samples()));
  }
  const Matrix ba = ds.X1 * pseudoinverse(d);
  return SystemEstimate{ba.rightCols(n), ba.leftCols(m)};
}

Matrix modified_dare_gain(const Matrix& a, const Matrix& b, const Matrix& h, const Matrix& r) {
  const Matrix s = r + b.transpose() * h * b;
  return -s.ldlt().solve(b.transpose() * h * a);
}

Matrix ce_lqr_gain(const Matrix& a_hat, const Matrix& b_hat, const CostWeights& w) {
  const Matrix h = solve_modified_dare(a_hat, b_hat, w.Q, w.R, 1.0);
  return modified_dare_gain(a_hat, b_hat, h, w.R);
}

namespace {

void check_v_shapes(const Matrix& v, const CovParam& cp, const CostWeights& w) {
  const Eigen::Index n = cp.states();
  const Eigen::Index m = cp.inputs();
  if (v.rows() != n + m || v.cols() != n || w.Q.rows() != n || w.R.rows() != m) {
    throw Error(ErrorKind::Dimension, "V-parametrization shapes do not match the data");
  }
}

}  // namespace

VCost cost_V(const Matrix& v, const CovParam& cp, const CostWeights& w) {
  check_v_shapes(v, cp, w);
  const Eigen::Index n = cp.states();
  const double infeas = norm2(cp.Xbar0() * v - Matrix::Identity(n, n));
  if (infeas > tolerances::kFeasibility) {
    throw Error(ErrorKind::Infeasible, "cost_V: ‖X̄₀V − I‖ = " + std::to_string(infeas));
  }
  const Matrix closed = cp.Xbar1 * v;
  const Matrix k = cp.Ubar0() * v;
  const Matrix stage = symmetrized(w.Q + k.transpose() * w.R * k);

  VCost out;
  out.SigmaV = solve_discrete_lyapunov(closed, Matrix::Identity(n, n));
  out.PV = solve_discrete_lyapunov(closed.transpose(), stage);
  out.cost = (stage * out.SigmaV).trace();
  return out;
}

Matrix deepo_gradient(const Matrix& v, const CovParam& cp, const CostWeights& w, const VCost& at_v) {
  check_v_shapes(v, cp, w);
  const Matrix ubar0 = cp.Ubar0();
  const Matrix& xbar1 = cp.Xbar1;
  return 2.0 * (ubar0.transpose() * w.R * ubar0 + xbar1.transpose() * at_v.PV * xbar1) * v *
         at_v.SigmaV;
}

Matrix deepo_gradient(const Matrix& v, const CovParam& cp, const CostWeights& w) {
  return deepo_gradient(v, cp, w, cost_V(v, cp, w));
}

Matrix project_gradient(const Matrix& g, const Matrix& xbar0) {
  if (g.rows() != xbar0.cols()) {
    throw Error(ErrorKind::Dimension, "project_gradient: g rows must equal X̄₀ columns");
  }
  return g - pseudoinverse(xbar0) * (xbar0 * g);
}

Matrix reparametrize(const Matrix& k, const CovParam& cp) {
  const Eigen::Index n = cp.states();
  const Eigen::Index m = cp.inputs();
  if (k.rows() != m || k.cols() != n) {
    throw Error(ErrorKind::Dimension, "reparametrize: gain shape mismatch");
  }
  Matrix rhs(n + m, n);
  rhs << k, Matrix::Identity(n, n);
  Matrix v = cp.Phi.fullPivLu().solve(rhs);
  const Matrix xbar0 = cp.Xbar0();
  v -= pseudoinverse(xbar0) * (xbar0 * v - Matrix::Identity(n, n));
  return v;
}

GradientUpdate policy_gradient_step(const Matrix& k, const CovParam& cp, const CostWeights& w,
                                    double eta) {
  const double smin = min_singular_value(cp.Phi);
  if (smin < tolerances::kPhiSingular) {
    throw Error(ErrorKind::PhiSingular, "σ_min(Φ) = " + std::to_string(smin));
  }
  const Eigen::Index n = cp.states();

  GradientUpdate up;
  up.at.K = k;
  up.at.V = reparametrize(k, cp);
  up.feasibility_residual = norm2(cp.Xbar0() * up.at.V - Matrix::Identity(n, n));
  up.reconstruction_residual = norm2(cp.Ubar0() * up.at.V - k);

  const VCost c = cost_V(up.at.V, cp, w);
  up.at.SigmaV = c.SigmaV;
  up.at.PV = c.PV;
  up.at.cost = c.cost;

  const Matrix grad = deepo_gradient(up.at.V, cp, w, c);
  up.V_next = up.at.V - eta * project_gradient(grad, cp.Xbar0());
  up.K_next = cp.Ubar0() * up.V_next;
  return up;
}

std::optional<GradientUpdate> try_policy_gradient_step(const Matrix& k, const CovParam& cp,
                                                       const CostWeights& w, double eta) {
  try {
    return policy_gradient_step(k, cp, w, eta);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Unstable) throw;
    return std::nullopt;
  }
}

}  // namespace deepo
