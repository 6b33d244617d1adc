#include "kquad/qp.hpp"

#include <chrono>
#include <cmath>

namespace kquad {

double qp_kkt_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& P,
                       const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const Eigen::VectorXd& u) {
  const Eigen::VectorXd g = H * u + P;
  double r = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double v;
    if (u[i] <= lower[i])
      v = std::max(0.0, -g[i]);
    else if (u[i] >= upper[i])
      v = std::max(0.0, g[i]);
    else
      v = std::abs(g[i]);
    r = std::max(r, v);
  }
  return r;
}

QpSolution solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& P,
                    const Eigen::VectorXd& lower,
                    const Eigen::VectorXd& upper) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = P.size();
  if (H.rows() != n || H.cols() != n || lower.size() != n || upper.size() != n)
    throw QpError("solve_qp: dimension mismatch");
  if ((lower.array() > upper.array()).any())
    throw QpError("solve_qp: infeasible bounds (lower > upper)");
  {
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
      throw QpError("solve_qp: H is not positive definite");
  }

  const auto clamp = [&](Eigen::VectorXd v) {
    return v.cwiseMax(lower).cwiseMin(upper);
  };
  const auto objective = [&](const Eigen::VectorXd& v) {
    return 0.5 * v.dot(H * v) + P.dot(v);
  };

  Eigen::VectorXd u = clamp(Eigen::VectorXd::Zero(n));
  constexpr int kMaxIter = 200;
  constexpr double kTol = 1e-11;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    const Eigen::VectorXd g = H * u + P;
    if (qp_kkt_residual(H, P, lower, upper, u) <= kTol) break;

    // Free set: coordinates not pinned at a bound with an outward gradient.
    std::vector<Eigen::Index> free_idx;
    free_idx.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = u[i] <= lower[i] && g[i] > 0.0;
      const bool at_hi = u[i] >= upper[i] && g[i] < 0.0;
      if (!at_lo && !at_hi) free_idx.push_back(i);
    }

    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    if (!free_idx.empty()) {
      const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd Hf(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = g[free_idx[a]];
        for (Eigen::Index b = 0; b < nf; ++b)
          Hf(a, b) = H(free_idx[a], free_idx[b]);
      }
      const Eigen::VectorXd df = Hf.llt().solve(-gf);
      for (Eigen::Index a = 0; a < nf; ++a) d[free_idx[a]] = df[a];
    }

    // Projected Armijo backtracking on the Newton direction.
    const double f0 = objective(u);
    double step = 1.0;
    Eigen::VectorXd u_next = u;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd cand = clamp(u + step * d);
      const Eigen::VectorXd delta = cand - u;
      const double decr = g.dot(delta);
      if (objective(cand) <= f0 + 1e-4 * decr && delta.squaredNorm() > 0.0) {
        u_next = cand;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Fall back to a projected gradient step; if even that cannot move,
      // the iterate is stationary to working precision.
      const double hnorm = H.diagonal().maxCoeff();
      const Eigen::VectorXd cand = clamp(u - g / std::max(hnorm, 1e-12));
      if ((cand - u).squaredNorm() == 0.0) break;
      u_next = cand;
    }
    u = u_next;
  }

  QpSolution sol;
  sol.u = u;
  sol.objective = objective(u);
  sol.iterations = iter;
  sol.kkt_residual = qp_kkt_residual(H, P, lower, upper, u);
  sol.solve_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  return sol;
}

}  // namespace kquad
