#pragma once

#include "kquad/koopman.hpp"
#include "kquad/qp.hpp"

namespace kquad {

struct MpcConfig {
  int k{10};            // horizon length, steps
  double dt_mpc{0.006};  // model sampling period, seconds
  Vec6 Q_diag{(Vec6() << 10.0, 50.0, 100.0, 10.0, 10.0, 1.0).finished()};
  Vec4 R_diag{Vec4::Constant(1e-3)};
  Vec4 u_min{-150.0, 0.0, -150.0, 0.0};
  Vec4 u_max{150.0, 250.0, 150.0, 250.0};

  void validate() const {
    if (k < 1) throw std::invalid_argument("MpcConfig: k must be >= 1");
    if ((Q_diag.array() < 0).any() || (R_diag.array() < 0).any())
      throw std::invalid_argument("MpcConfig: weights must be >= 0");
    if (!(Q_diag.array() > 0).any() && !(R_diag.array() > 0).any())
      throw std::invalid_argument("MpcConfig: all weights are zero");
    if ((u_min.array() > u_max.array()).any())
      throw std::invalid_argument("MpcConfig: u_min must be <= u_max");
  }
};

/// Desired states over the horizon; length must equal MpcConfig::k.
using ReferenceTrajectory = std::vector<SrbState>;

/// Stacked-prediction matrices: X_qp = A_qp * lift(x0) + B_qp * U_qp, where
/// X_qp stacks the 6-dim physical states over k steps. Row-block i
/// (1-indexed) of A_qp is C_x A^i; block (i, j) of B_qp is C_x A^{i-j-1} B
/// for j < i and zero otherwise, with C_x the state-selection matrix.
void build_prediction_matrices(const KoopmanModel& model, int k,
                               Eigen::MatrixXd& A_qp, Eigen::MatrixXd& B_qp);

/// Dense tracking cost: H = 2 (B_qp' Q_qp B_qp + R_qp),
/// P = 2 (lift(x0)' A_qp' Q_qp B_qp - X_d' Q_qp B_qp), so that
/// 0.5 U'HU + P'U matches the finite-horizon tracking cost up to a
/// U-independent constant.
void build_cost(const Eigen::MatrixXd& A_qp, const Eigen::MatrixXd& B_qp,
                const Eigen::VectorXd& z0, const ReferenceTrajectory& ref,
                const MpcConfig& config, Eigen::MatrixXd& H,
                Eigen::VectorXd& P);

struct MpcResult {
  ControlInput command;  // first-step forces (arms left zero; caller fills)
  QpSolution qp;
};

/// Per-(model, k) precomputation of A_qp/B_qp and the constant part of H.
/// Bounds may be overridden per call to pin airborne force pairs to zero.
class MpcSolver {
 public:
  MpcSolver(const KoopmanModel& model, const MpcConfig& config);

  MpcResult step(const SrbState& x, const ReferenceTrajectory& ref) const;
  MpcResult step(const SrbState& x, const ReferenceTrajectory& ref,
                 const Vec4& u_min, const Vec4& u_max) const;

  const Eigen::MatrixXd& A_qp() const { return A_qp_; }
  const Eigen::MatrixXd& B_qp() const { return B_qp_; }
  const MpcConfig& config() const { return config_; }
  const KoopmanModel& model() const { return model_; }

 private:
  KoopmanModel model_;
  MpcConfig config_;
  Eigen::MatrixXd A_qp_;
  Eigen::MatrixXd B_qp_;
  Eigen::MatrixXd H_;          // constant for fixed (model, weights)
  Eigen::MatrixXd QB_;         // Q_qp * B_qp, reused when forming P
};

/// Convenience single-shot receding-horizon step.
MpcResult mpc_step(const KoopmanModel& model, const SrbState& x,
                   const ReferenceTrajectory& ref, const MpcConfig& config);

/// Writes one QP instance (H, P, bounds, solution) as JSON for offline
/// solver cross-checks.
void dump_qp_instance(const Eigen::MatrixXd& H, const Eigen::VectorXd& P,
                      const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper, const QpSolution& sol,
                      const std::string& path);

}  // namespace kquad
