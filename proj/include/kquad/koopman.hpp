#pragma once

#include <string>
#include <vector>

#include "kquad/srb.hpp"

namespace kquad {

/// Dictionary layout: [1, p (2), theta, p_dot (2), theta_dot,
/// vec(R*td), vec(R*td^2), ..., vec(R*td^p)] with column-major vec().
struct ObservableConfig {
  int p_order{4};

  int lifted_dim() const { return 7 + 4 * p_order; }
  void validate() const {
    if (p_order < 1)
      throw std::invalid_argument("ObservableConfig: p_order must be >= 1");
  }
};

Eigen::VectorXd lift(const SrbState& x, const ObservableConfig& config);

/// Pulls the embedded state (elements 1..6) back out of a lifted vector.
SrbState recover_state(const Eigen::VectorXd& z);

struct FitStats {
  double residual{0.0};          // RMS lifted one-step residual per sample
  double condition_number{0.0};  // of the (regularized) Gram matrix
  int sample_count{0};
};

struct SnapshotSet {
  ContactMode mode{ContactMode::Trot};
  double dt{0.001};
  std::vector<Vec6> X;  // pre-states
  std::vector<Vec6> Y;  // post-states
  std::vector<Vec4> U;  // inputs

  std::size_t size() const { return X.size(); }
  void validate() const {
    if (X.size() != Y.size() || X.size() != U.size())
      throw std::invalid_argument("SnapshotSet: X/Y/U length mismatch");
  }
};

void save_snapshots(const SnapshotSet& data, const std::string& path);
SnapshotSet load_snapshots(const std::string& path);

/// One lifted linear predictor z+ = A z + B u per contact mode.
struct KoopmanModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  ContactMode mode{ContactMode::Trot};
  ObservableConfig config;
  double dt{0.001};
  FitStats fit_stats;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// EDMD least squares over lifted snapshot pairs with Tikhonov ridge on the
/// sample-normalized Gram matrix: K = G_yx (G_xx + ridge I)^-1 with
/// G_xx = (1/M) sum lifted(x,u) lifted(x,u)^T. The dictionary contains exact
/// linear dependencies (duplicated rotation entries), so ridge = 0 is
/// rejected with the measured condition number.
KoopmanModel edmd_fit(const SnapshotSet& data, const ObservableConfig& config,
                      double ridge = 1e-8);

Eigen::VectorXd predict(const KoopmanModel& model, const Eigen::VectorXd& z,
                        const Vec4& u);

/// Lift once, iterate predict, recover each state. Returns x0 followed by
/// one state per input.
std::vector<SrbState> multi_step_predict(const KoopmanModel& model,
                                         const SrbState& x0,
                                         const std::vector<Vec4>& u_seq);

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ModelVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ModelDimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_model(const KoopmanModel& model, const std::string& path);
KoopmanModel load_model(const std::string& path);

}  // namespace kquad
