#include "kquad/lmpc.hpp"

#include "json.hpp"

#include <fstream>

namespace kquad {

void build_prediction_matrices(const KoopmanModel& model, int k,
                               Eigen::MatrixXd& A_qp, Eigen::MatrixXd& B_qp) {
  if (k < 1) throw std::invalid_argument("build_prediction_matrices: k >= 1");
  const int N = static_cast<int>(model.A.rows());
  const int m = static_cast<int>(model.B.cols());
  constexpr int n = 6;  // physical state block, lifted elements 1..6

  // C_x A^i accumulated row-block by row-block; power tracked incrementally.
  A_qp.setZero(n * k, N);
  B_qp.setZero(n * k, m * k);
  Eigen::MatrixXd Apow = model.A;  // A^(i) for row-block i
  std::vector<Eigen::MatrixXd> CAB(k);  // C_x A^q B for q = 0..k-1
  Eigen::MatrixXd AqB = model.B;
  for (int q = 0; q < k; ++q) {
    CAB[q] = AqB.middleRows(1, n);
    AqB = model.A * AqB;
  }
  for (int i = 0; i < k; ++i) {
    A_qp.middleRows(n * i, n) = Apow.middleRows(1, n);
    if (i + 1 < k) Apow = model.A * Apow;
    for (int j = 0; j <= i; ++j)
      B_qp.block(n * i, m * j, n, m) = CAB[i - j];
  }
}

void build_cost(const Eigen::MatrixXd& A_qp, const Eigen::MatrixXd& B_qp,
                const Eigen::VectorXd& z0, const ReferenceTrajectory& ref,
                const MpcConfig& config, Eigen::MatrixXd& H,
                Eigen::VectorXd& P) {
  config.validate();
  constexpr int n = 6;
  const int k = config.k;
  if (static_cast<int>(ref.size()) != k)
    throw std::invalid_argument("build_cost: reference length must equal k");
  if (A_qp.rows() != n * k || B_qp.rows() != n * k)
    throw std::invalid_argument("build_cost: prediction matrix size mismatch");

  Eigen::VectorXd q_rep(n * k);
  Eigen::VectorXd xd(n * k);
  for (int i = 0; i < k; ++i) {
    q_rep.segment<n>(n * i) = config.Q_diag;
    xd.segment<n>(n * i) = ref[static_cast<std::size_t>(i)].to_vector();
  }
  const Eigen::MatrixXd QB = q_rep.asDiagonal() * B_qp;
  H = 2.0 * (B_qp.transpose() * QB);
  for (int i = 0; i < k; ++i)
    H.diagonal().segment<4>(4 * i) += 2.0 * config.R_diag;
  H = 0.5 * (H + H.transpose());  // enforce exact symmetry
  P = 2.0 * QB.transpose() * (A_qp * z0 - xd);
}

MpcSolver::MpcSolver(const KoopmanModel& model, const MpcConfig& config)
    : model_(model), config_(config) {
  config_.validate();
  if (std::abs(model_.dt - config_.dt_mpc) > 1e-12)
    throw std::invalid_argument("MpcSolver: model.dt must equal dt_mpc");
  build_prediction_matrices(model_, config_.k, A_qp_, B_qp_);
  constexpr int n = 6;
  Eigen::VectorXd q_rep(n * config_.k);
  for (int i = 0; i < config_.k; ++i) q_rep.segment<n>(n * i) = config_.Q_diag;
  QB_ = q_rep.asDiagonal() * B_qp_;
  H_ = 2.0 * (B_qp_.transpose() * QB_);
  for (int i = 0; i < config_.k; ++i)
    H_.diagonal().segment<4>(4 * i) += 2.0 * config_.R_diag;
  H_ = 0.5 * (H_ + H_.transpose());
}

MpcResult MpcSolver::step(const SrbState& x,
                          const ReferenceTrajectory& ref) const {
  return step(x, ref, config_.u_min, config_.u_max);
}

MpcResult MpcSolver::step(const SrbState& x, const ReferenceTrajectory& ref,
                          const Vec4& u_min, const Vec4& u_max) const {
  constexpr int n = 6;
  const int k = config_.k;
  if (static_cast<int>(ref.size()) != k)
    throw std::invalid_argument("MpcSolver::step: reference length must equal k");
  const Eigen::VectorXd z0 = lift(x, model_.config);
  Eigen::VectorXd xd(n * k);
  for (int i = 0; i < k; ++i)
    xd.segment<n>(n * i) = ref[static_cast<std::size_t>(i)].to_vector();
  const Eigen::VectorXd P = 2.0 * QB_.transpose() * (A_qp_ * z0 - xd);

  Eigen::VectorXd lower(4 * k), upper(4 * k);
  for (int i = 0; i < k; ++i) {
    lower.segment<4>(4 * i) = u_min;
    upper.segment<4>(4 * i) = u_max;
  }
  MpcResult result;
  result.qp = solve_qp(H_, P, lower, upper);
  result.command.F_i = Vec2{result.qp.u[0], result.qp.u[1]};
  result.command.F_j = Vec2{result.qp.u[2], result.qp.u[3]};
  return result;
}

MpcResult mpc_step(const KoopmanModel& model, const SrbState& x,
                   const ReferenceTrajectory& ref, const MpcConfig& config) {
  return MpcSolver(model, config).step(x, ref);
}

void dump_qp_instance(const Eigen::MatrixXd& H, const Eigen::VectorXd& P,
                      const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper, const QpSolution& sol,
                      const std::string& path) {
  nlohmann::json j;
  const auto to_vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  std::vector<double> h(static_cast<std::size_t>(H.size()));
  for (int r = 0; r < H.rows(); ++r)
    for (int c = 0; c < H.cols(); ++c)
      h[static_cast<std::size_t>(r * H.cols() + c)] = H(r, c);
  j["n"] = P.size();
  j["H"] = h;
  j["P"] = to_vec(P);
  j["lower"] = to_vec(lower);
  j["upper"] = to_vec(upper);
  j["solution"] = to_vec(sol.u);
  j["objective"] = sol.objective;
  j["kkt_residual"] = sol.kkt_residual;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dump_qp_instance: cannot open " + path);
  os << j.dump(1) << '\n';
}

}  // namespace kquad
