#include "kquad/koopman.hpp"

#include "json.hpp"

#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>

namespace kquad {

Eigen::VectorXd lift(const SrbState& x, const ObservableConfig& config) {
  config.validate();
  Eigen::VectorXd z(config.lifted_dim());
  z[0] = 1.0;
  z.segment<6>(1) = x.to_vector();
  const Mat2 R = rotation_matrix(x.theta);
  double td_pow = 1.0;
  for (int s = 1; s <= config.p_order; ++s) {
    td_pow *= x.theta_dot;
    const int base = 7 + 4 * (s - 1);
    // column-major vec of R * theta_dot^s
    z[base + 0] = R(0, 0) * td_pow;
    z[base + 1] = R(1, 0) * td_pow;
    z[base + 2] = R(0, 1) * td_pow;
    z[base + 3] = R(1, 1) * td_pow;
  }
  return z;
}

SrbState recover_state(const Eigen::VectorXd& z) {
  if (z.size() < 7)
    throw std::invalid_argument("recover_state: lifted vector too short");
  return SrbState::from_vector(z.segment<6>(1));
}

namespace {

Eigen::VectorXd lift_with_input(const Eigen::VectorXd& z, const Vec4& u) {
  Eigen::VectorXd zu(z.size() + 4);
  zu.head(z.size()) = z;
  zu.tail(4) = u;
  return zu;
}

void write_double(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void save_snapshots(const SnapshotSet& data, const std::string& path) {
  data.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_snapshots: cannot open " + path);
  os << "mode,dt,x0,x1,x2,x3,x4,x5,u0,u1,u2,u3,y0,y1,y2,y3,y4,y5\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    os << mode_name(data.mode) << ',';
    write_double(os, data.dt);
    for (int i = 0; i < 6; ++i) { os << ','; write_double(os, data.X[k][i]); }
    for (int i = 0; i < 4; ++i) { os << ','; write_double(os, data.U[k][i]); }
    for (int i = 0; i < 6; ++i) { os << ','; write_double(os, data.Y[k][i]); }
    os << '\n';
  }
}

SnapshotSet load_snapshots(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_snapshots: cannot open " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("load_snapshots: empty file " + path);
  SnapshotSet data;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    const ContactMode mode = mode_from_name(field);
    std::getline(ss, field, ',');
    const double dt = std::stod(field);
    if (first) {
      data.mode = mode;
      data.dt = dt;
      first = false;
    } else if (mode != data.mode) {
      throw std::runtime_error("load_snapshots: mixed modes in " + path);
    }
    Vec6 x, y;
    Vec4 u;
    for (int i = 0; i < 6; ++i) { std::getline(ss, field, ','); x[i] = std::stod(field); }
    for (int i = 0; i < 4; ++i) { std::getline(ss, field, ','); u[i] = std::stod(field); }
    for (int i = 0; i < 6; ++i) { std::getline(ss, field, ','); y[i] = std::stod(field); }
    data.X.push_back(x);
    data.U.push_back(u);
    data.Y.push_back(y);
  }
  return data;
}

KoopmanModel edmd_fit(const SnapshotSet& data, const ObservableConfig& config,
                      double ridge) {
  config.validate();
  data.validate();
  if (ridge < 0.0) throw std::invalid_argument("edmd_fit: ridge must be >= 0");
  const int N = config.lifted_dim();
  const int m = 4;
  const int M = static_cast<int>(data.size());
  if (M < N + m)
    throw FitError("edmd_fit: insufficient samples (" + std::to_string(M) +
                   " < " + std::to_string(N + m) + ")");

  Eigen::MatrixXd Gxx = Eigen::MatrixXd::Zero(N + m, N + m);
  Eigen::MatrixXd Gyx = Eigen::MatrixXd::Zero(N, N + m);
  for (int k = 0; k < M; ++k) {
    const Eigen::VectorXd zu =
        lift_with_input(lift(SrbState::from_vector(data.X[k]), config), data.U[k]);
    const Eigen::VectorXd zy = lift(SrbState::from_vector(data.Y[k]), config);
    Gxx.noalias() += zu * zu.transpose();
    Gyx.noalias() += zy * zu.transpose();
  }
  Gxx /= M;
  Gyx /= M;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Gxx);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  // An exactly singular Gram (the dictionary has duplicate columns) reports
  // the largest finite condition number so it stays JSON-representable.
  const double cond = lmin > lmax * 1e-300
                          ? lmax / lmin
                          : std::numeric_limits<double>::max();
  if (ridge == 0.0 && !(cond < 1e14))
    throw FitError("edmd_fit: Gram matrix ill-conditioned (condition number " +
                   std::to_string(cond) + "); use ridge > 0");

  Eigen::MatrixXd Greg = Gxx;
  Greg.diagonal().array() += ridge;
  // K (Gxx + ridge I) = Gyx  =>  solve the transposed SPD system
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Greg);
  if (ldlt.info() != Eigen::Success)
    throw FitError("edmd_fit: Gram factorization failed");
  Eigen::MatrixXd K = ldlt.solve(Gyx.transpose()).transpose();

  KoopmanModel model;
  model.A = K.leftCols(N);
  model.B = K.rightCols(m);
  model.mode = data.mode;
  model.config = config;
  model.dt = data.dt;
  model.fit_stats.sample_count = M;
  model.fit_stats.condition_number = cond;
  double ss = 0.0;
  for (int k = 0; k < M; ++k) {
    const Eigen::VectorXd zu =
        lift_with_input(lift(SrbState::from_vector(data.X[k]), config), data.U[k]);
    const Eigen::VectorXd zy = lift(SrbState::from_vector(data.Y[k]), config);
    ss += (zy - K * zu).squaredNorm();
  }
  model.fit_stats.residual = std::sqrt(ss / M);
  return model;
}

Eigen::VectorXd predict(const KoopmanModel& model, const Eigen::VectorXd& z,
                        const Vec4& u) {
  if (z.size() != model.A.cols())
    throw std::invalid_argument("predict: lifted state dimension mismatch");
  return model.A * z + model.B * u;
}

std::vector<SrbState> multi_step_predict(const KoopmanModel& model,
                                         const SrbState& x0,
                                         const std::vector<Vec4>& u_seq) {
  if (u_seq.empty())
    throw std::invalid_argument("multi_step_predict: empty input sequence");
  std::vector<SrbState> out;
  out.reserve(u_seq.size() + 1);
  out.push_back(x0);
  Eigen::VectorXd z = lift(x0, model.config);
  for (const auto& u : u_seq) {
    z = predict(model, z, u);
    out.push_back(recover_state(z));
  }
  return out;
}

namespace {
constexpr int kModelFileVersion = 1;
}

void save_model(const KoopmanModel& model, const std::string& path) {
  nlohmann::json j;
  j["version"] = kModelFileVersion;
  j["mode"] = mode_name(model.mode);
  j["dt"] = model.dt;
  j["p_order"] = model.config.p_order;
  j["N"] = model.config.lifted_dim();
  j["m"] = 4;
  std::vector<double> a(model.A.size()), b(model.B.size());
  for (int r = 0; r < model.A.rows(); ++r)
    for (int c = 0; c < model.A.cols(); ++c)
      a[r * model.A.cols() + c] = model.A(r, c);
  for (int r = 0; r < model.B.rows(); ++r)
    for (int c = 0; c < model.B.cols(); ++c)
      b[r * model.B.cols() + c] = model.B(r, c);
  j["A"] = a;
  j["B"] = b;
  j["fit_stats"] = {{"residual", model.fit_stats.residual},
                    {"condition_number", model.fit_stats.condition_number},
                    {"sample_count", model.fit_stats.sample_count}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  os << j.dump(1) << '\n';
}

KoopmanModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelFormatError("load_model: malformed model file " + path + ": " +
                           e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kModelFileVersion)
      throw ModelVersionError("load_model: unsupported version " +
                              std::to_string(version));
    KoopmanModel model;
    model.mode = mode_from_name(j.at("mode").get<std::string>());
    model.dt = j.at("dt").get<double>();
    model.config.p_order = j.at("p_order").get<int>();
    const int N = j.at("N").get<int>();
    const int m = j.at("m").get<int>();
    if (N != model.config.lifted_dim() || m != 4)
      throw ModelDimensionError("load_model: N/m inconsistent with p_order in " +
                                path);
    const auto a = j.at("A").get<std::vector<double>>();
    const auto b = j.at("B").get<std::vector<double>>();
    if (static_cast<int>(a.size()) != N * N ||
        static_cast<int>(b.size()) != N * m)
      throw ModelDimensionError("load_model: matrix size mismatch in " + path);
    model.A.resize(N, N);
    model.B.resize(N, m);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) model.A(r, c) = a[r * N + c];
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < m; ++c) model.B(r, c) = b[r * m + c];
    const auto& fs = j.at("fit_stats");
    model.fit_stats.residual = fs.at("residual").get<double>();
    model.fit_stats.condition_number = fs.at("condition_number").get<double>();
    model.fit_stats.sample_count = fs.at("sample_count").get<int>();
    return model;
  } catch (const ModelVersionError&) {
    throw;
  } catch (const ModelDimensionError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError("load_model: malformed model file " + path + ": " +
                           e.what());
  }
}

}  // namespace kquad
