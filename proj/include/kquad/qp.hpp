#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace kquad {

struct QpSolution {
  Eigen::VectorXd u;
  double objective{0.0};
  int iterations{0};
  double kkt_residual{0.0};
  double solve_time_ms{0.0};
};

class QpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimize 0.5 u'Hu + P'u subject to lower <= u <= upper, for symmetric
/// positive definite H. Active-set Newton iteration: solve the free-variable
/// subsystem, project onto the box with a backtracking line search, and
/// update the active set from the KKT signs. Deterministic.
/// Throws QpError on non-PD H or an infeasible box.
QpSolution solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& P,
                    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// KKT residual of a candidate: max over coordinates of the projected
/// gradient violation (gradient must be >= 0 at lower, <= 0 at upper,
/// ~0 in the interior).
double qp_kkt_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& P,
                       const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const Eigen::VectorXd& u);

}  // namespace kquad
