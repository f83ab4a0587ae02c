#include "icfpie/models.hpp"

#include <cmath>
#include <string>

#include "icfpie/errors.hpp"

namespace icfpie {

namespace {

bool symmetric(const Matrix& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <=
         tol * (1.0 + m.cwiseAbs().maxCoeff());
}

void require_spd(const Matrix& m, const char* what) {
  if (!symmetric(m)) throw ConfigError(std::string(what) + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError(std::string(what) + " must be positive definite");
  }
}

void require_psd(const Matrix& m, const char* what) {
  if (!symmetric(m)) throw ConfigError(std::string(what) + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < 0.0) {
    throw ConfigError(std::string(what) + " must be positive semidefinite");
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + " has non-finite entries");
  }
}

}  // namespace

SystemModel::SystemModel(Transition transition, Jacobian jacobian,
                         Matrix process_cov)
    : transition_(std::move(transition)),
      jacobian_(std::move(jacobian)),
      process_cov_(std::move(process_cov)) {
  require_spd(process_cov_, "process covariance");
}

SystemModel SystemModel::linear(Matrix transition_matrix, Matrix process_cov) {
  if (transition_matrix.rows() != transition_matrix.cols() ||
      transition_matrix.rows() != process_cov.rows()) {
    throw ConfigError("transition matrix must be n x n with n = dim(Q)");
  }
  Matrix A = transition_matrix;
  SystemModel model([A](const StateVector& x) -> StateVector { return A * x; },
                    [A](const StateVector&) -> Matrix { return A; },
                    std::move(process_cov));
  model.linear_matrix_ = std::move(transition_matrix);
  return model;
}

StateVector SystemModel::transition(const StateVector& x) const {
  if (x.size() != state_dim()) throw ConfigError("state dimension mismatch");
  return transition_(x);
}

Matrix SystemModel::jacobian(const StateVector& x) const {
  if (x.size() != state_dim()) throw ConfigError("state dimension mismatch");
  return jacobian_(x);
}

MeasurementModel::MeasurementModel(int node_id, Observe observe,
                                   Jacobian jacobian, Matrix meas_cov,
                                   Eigen::Index state_dim)
    : node_id_(node_id),
      observe_(std::move(observe)),
      jacobian_(std::move(jacobian)),
      meas_cov_(std::move(meas_cov)),
      state_dim_(state_dim) {
  // Zero noise is accepted for noiseless readouts; inverting R for the
  // filter requires it to be definite (see noise_information).
  require_psd(meas_cov_, "measurement covariance");
}

MeasurementModel MeasurementModel::linear(int node_id, Matrix observation_matrix,
                                          Matrix meas_cov) {
  if (observation_matrix.rows() != meas_cov.rows()) {
    throw ConfigError("observation matrix rows must equal dim(R)");
  }
  const Eigen::Index n = observation_matrix.cols();
  Matrix C = observation_matrix;
  MeasurementModel model(
      node_id, [C](const StateVector& x) -> Vector { return C * x; },
      [C](const StateVector&) -> Matrix { return C; }, std::move(meas_cov), n);
  model.linear_ = true;
  return model;
}

Vector MeasurementModel::observe(const StateVector& x) const {
  if (x.size() != state_dim_) throw ConfigError("state dimension mismatch");
  return observe_(x);
}

Matrix MeasurementModel::jacobian(const StateVector& x) const {
  if (x.size() != state_dim_) throw ConfigError("state dimension mismatch");
  Matrix C = jacobian_(x);
  if (C.rows() != meas_dim() || C.cols() != state_dim_) {
    throw ConfigError("measurement Jacobian must be m x n");
  }
  return C;
}

void TruthModel::validate() const {
  if (!(speed_min <= speed_max)) throw ConfigError("speed range is reversed");
  if (!(heading_min <= heading_max)) throw ConfigError("heading range is reversed");
  if (!(speed_variance >= 0.0)) throw ConfigError("speed variance must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
}

TruthStep propagate_truth(const StateVector& state, const TruthModel& model,
                          Rng& rng) {
  if (state.size() != 4) throw ConfigError("truth state must be [x, y, vx, vy]");
  TruthStep out{state, false};
  out.state.head<2>() += model.dt * state.tail<2>();

  const double speed = state.tail<2>().norm();
  if (speed == 0.0) {
    out.degenerate_heading = true;
    return out;
  }
  double perturbed = speed;
  if (model.speed_variance > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(model.speed_variance));
    perturbed += noise(rng);
  }
  out.state.tail<2>() = state.tail<2>() * (perturbed / speed);
  if (!out.state.allFinite()) throw NumericalError("truth state is not finite");
  return out;
}

StateVector sample_initial_truth(const TruthModel& model, Rng& rng) {
  model.validate();
  std::uniform_real_distribution<double> speed(model.speed_min, model.speed_max);
  std::uniform_real_distribution<double> heading(model.heading_min,
                                                 model.heading_max);
  const double v = speed(rng);
  const double psi = heading(rng);
  StateVector x(4);
  x << model.initial_position.x(), model.initial_position.y(),
      v * std::cos(psi), v * std::sin(psi);
  return x;
}

Vector sample_gaussian(const Matrix& cov, Rng& rng) {
  std::normal_distribution<double> standard(0.0, 1.0);
  Vector z(cov.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard(rng);

  // Eigen square root tolerates the semidefinite (noiseless) case.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * z;
}

Vector sample_measurement(const StateVector& state, const MeasurementModel& meas,
                          Rng& rng) {
  Vector y = meas.observe(state);
  if (y.size() != meas.meas_dim()) {
    throw ConfigError("observation length must equal dim(R)");
  }
  return y + sample_gaussian(meas.meas_cov(), rng);
}

Matrix linearize(const SystemModel& model, const StateVector& x_hat) {
  if (model.linear_matrix()) return *model.linear_matrix();
  Matrix A = model.jacobian(x_hat);
  require_finite(A, "system Jacobian");
  return A;
}

Matrix linearize(const MeasurementModel& model, const StateVector& x_hat) {
  Matrix C = model.jacobian(x_hat);
  require_finite(C, "measurement Jacobian");
  return C;
}

Matrix constant_velocity_matrix(double dt) {
  Matrix A = Matrix::Identity(4, 4);
  A(0, 2) = dt;
  A(1, 3) = dt;
  return A;
}

Matrix position_observation_matrix() {
  Matrix C = Matrix::Zero(2, 4);
  C(0, 0) = 1.0;
  C(1, 1) = 1.0;
  return C;
}

}  // namespace icfpie
