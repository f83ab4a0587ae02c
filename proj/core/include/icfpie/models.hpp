#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace icfpie {

using StateVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Per-run random source. Never shared between runs or threads.
using Rng = std::mt19937_64;

/// Process model x_{t+1} = f(x_t) + w_t, w_t ~ N(0, Q).
///
/// For linear time-invariant systems use SystemModel::linear(), which fixes
/// the Jacobian to the transition matrix.
class SystemModel {
 public:
  using Transition = std::function<StateVector(const StateVector&)>;
  using Jacobian = std::function<Matrix(const StateVector&)>;

  SystemModel(Transition transition, Jacobian jacobian, Matrix process_cov);

  static SystemModel linear(Matrix transition_matrix, Matrix process_cov);

  StateVector transition(const StateVector& x) const;
  Matrix jacobian(const StateVector& x) const;

  const Matrix& process_cov() const { return process_cov_; }
  const std::optional<Matrix>& linear_matrix() const { return linear_matrix_; }
  Eigen::Index state_dim() const { return process_cov_.rows(); }

 private:
  Transition transition_;
  Jacobian jacobian_;
  Matrix process_cov_;
  std::optional<Matrix> linear_matrix_;
};

/// Sensor model y^i = h^i(x) + v^i, v^i ~ N(0, R^i).
class MeasurementModel {
 public:
  using Observe = std::function<Vector(const StateVector&)>;
  using Jacobian = std::function<Matrix(const StateVector&)>;

  MeasurementModel(int node_id, Observe observe, Jacobian jacobian,
                   Matrix meas_cov, Eigen::Index state_dim);

  static MeasurementModel linear(int node_id, Matrix observation_matrix,
                                 Matrix meas_cov);

  int node_id() const { return node_id_; }
  Vector observe(const StateVector& x) const;
  Matrix jacobian(const StateVector& x) const;
  const Matrix& meas_cov() const { return meas_cov_; }
  Eigen::Index meas_dim() const { return meas_cov_.rows(); }
  Eigen::Index state_dim() const { return state_dim_; }
  bool is_linear() const { return linear_; }

 private:
  int node_id_;
  Observe observe_;
  Jacobian jacobian_;
  Matrix meas_cov_;
  Eigen::Index state_dim_;
  bool linear_ = false;
};

/// Ground-truth target motion for the planar [x, y, vx, vy] state.
struct TruthModel {
  Eigen::Vector2d initial_position{400.0, 0.0};
  double speed_min = 10.0;
  double speed_max = 15.0;
  double heading_min = 0.0;
  double heading_max = 0.0;
  double speed_variance = 0.25;
  double dt = 0.1;

  void validate() const;
};

struct TruthStep {
  StateVector state;
  // Velocity was exactly zero, so the heading is undefined and the speed
  // perturbation was skipped.
  bool degenerate_heading = false;
};

/// Advances a planar constant-velocity target by one step.
///
/// Position moves by dt times the current velocity, then the speed is
/// perturbed by one N(0, speed_variance) draw with the heading held fixed.
TruthStep propagate_truth(const StateVector& state, const TruthModel& model,
                          Rng& rng);

/// Draws the initial [x, y, vx, vy] with uniform speed and heading.
StateVector sample_initial_truth(const TruthModel& model, Rng& rng);

/// h(x) plus one draw of zero-mean Gaussian noise with covariance R.
Vector sample_measurement(const StateVector& state,
                          const MeasurementModel& meas, Rng& rng);

/// Zero-mean Gaussian sample with the given covariance.
Vector sample_gaussian(const Matrix& cov, Rng& rng);

Matrix linearize(const SystemModel& model, const StateVector& x_hat);
Matrix linearize(const MeasurementModel& model, const StateVector& x_hat);

/// Planar constant-velocity transition matrix for time step dt.
Matrix constant_velocity_matrix(double dt);

/// 2x4 position readout.
Matrix position_observation_matrix();

}  // namespace icfpie
