#include "icfpie/info_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "icfpie/errors.hpp"

namespace icfpie {

namespace {

void require_square(const Matrix& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw ConfigError(std::string(what) + " must be " + std::to_string(n) +
                      " x " + std::to_string(n));
  }
}

// Time update from an explicit posterior estimate. omega is symmetrized and
// regularized before inversion.
InformationState predict_from(const Matrix& omega_post,
                              const StateVector& x_next, const Matrix& A,
                              const Matrix& W, NumericReport* report) {
  const Eigen::Index n = omega_post.rows();
  require_square(A, n, "A");
  require_square(W, n, "W");

  const Matrix P =
      symmetric_inverse(regularized(symmetrized(omega_post), report), report);
  const Matrix Q = spd_inverse(symmetrized(W));
  const Matrix P_next = symmetrized(A * P * A.transpose() + Q);

  InformationState out;
  out.omega = symmetrized(symmetric_inverse(P_next, report));
  out.q = out.omega * x_next;
  if (!out.omega.allFinite() || !out.q.allFinite()) {
    throw NumericalError("prediction produced non-finite information");
  }
  return out;
}

}  // namespace

InformationState InformationState::zero(Eigen::Index n) {
  return {Matrix::Zero(n, n), Vector::Zero(n)};
}

NoiseInformation noise_information(const Matrix& process_cov,
                                   std::span<const Matrix> meas_covs) {
  NoiseInformation out;
  out.w = symmetrized(spd_inverse(process_cov));
  out.v_per_node.reserve(meas_covs.size());
  for (const Matrix& R : meas_covs) {
    out.v_per_node.push_back(symmetrized(spd_inverse(R)));
  }
  return out;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix regularized(const Matrix& omega, NumericReport* report) {
  const Eigen::Index n = omega.rows();
  if (n == 0) return omega;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(omega, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() >= kSingularEigenvalue) return omega;

  const double lambda =
      1e-8 * (1.0 + omega.trace() / static_cast<double>(n));
  if (report) ++report->regularizations;
  return omega + lambda * Matrix::Identity(n, n);
}

Matrix spd_inverse(const Matrix& m) {
  if (m.rows() != m.cols()) throw ConfigError("cannot invert a non-square matrix");
  if (m.rows() == 0) return m;
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("matrix is not positive definite");
  }
  // LDLT reports isPositive() for semidefinite input; a zero pivot means
  // the inverse does not exist.
  const auto d = ldlt.vectorD();
  if (d.minCoeff() <= 0.0) throw NumericalError("matrix is singular");
  Matrix inv = ldlt.solve(Matrix::Identity(m.rows(), m.cols()));
  if (!inv.allFinite()) throw NumericalError("matrix inverse is not finite");
  return inv;
}

Matrix symmetric_inverse(const Matrix& m, NumericReport* report) {
  if (m.rows() != m.cols()) throw ConfigError("cannot invert a non-square matrix");
  if (m.rows() == 0) return m;
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
      ldlt.vectorD().minCoeff() > 0.0) {
    Matrix inv = ldlt.solve(Matrix::Identity(m.rows(), m.cols()));
    if (inv.allFinite()) return inv;
  }
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw NumericalError("matrix is singular");
  Matrix inv = lu.inverse();
  if (!inv.allFinite()) throw NumericalError("matrix inverse is not finite");
  if (report) ++report->indefinite_inversions;
  return inv;
}

double condition_number(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

CorrectionTerms local_correction_terms(const Matrix& C, const Matrix& V,
                                       const Vector& y) {
  if (V.rows() != C.rows() || V.cols() != C.rows() || y.size() != C.rows()) {
    throw ConfigError("local correction: C is m x n, V is m x m, y has m entries");
  }
  const Matrix CtV = C.transpose() * V;
  return {symmetrized(CtV * C), CtV * y};
}

Vector linearized_measurement(const MeasurementModel& model, const Vector& y,
                              const StateVector& x_prior, const Matrix& C) {
  if (model.is_linear()) return y;
  return y - model.observe(x_prior) + C * x_prior;
}

InformationState centralized_correct(
    const InformationState& prior,
    std::span<const SensorContribution> contributions) {
  InformationState post = prior;
  for (const SensorContribution& c : contributions) {
    const CorrectionTerms terms = local_correction_terms(c.C, c.V, c.y_bar);
    if (terms.delta_omega.rows() != post.omega.rows()) {
      throw ConfigError("contribution state dimension mismatch");
    }
    post.omega += terms.delta_omega;
    post.q += terms.delta_q;
  }
  post.omega = symmetrized(post.omega);
  return post;
}

InformationState predict(const InformationState& post, const Matrix& A,
                         const Matrix& W, NumericReport* report) {
  const StateEstimate est = to_state_estimate(post);
  if (est.singular && report) ++report->singular_solves;
  return predict_from(post.omega, A * est.x, A, W, report);
}

InformationState predict(const InformationState& post, const SystemModel& sys,
                         const Matrix& W, NumericReport* report) {
  const StateEstimate est = to_state_estimate(post);
  if (est.singular && report) ++report->singular_solves;
  return predict_from(post.omega, sys.transition(est.x), linearize(sys, est.x),
                      W, report);
}

InformationState predict_with_estimate(const Matrix& omega_post,
                                       const StateVector& x_post,
                                       const SystemModel& sys, const Matrix& W,
                                       NumericReport* report) {
  return predict_from(omega_post, sys.transition(x_post),
                      linearize(sys, x_post), W, report);
}

StateEstimate to_state_estimate(const InformationState& s) {
  return solve_information(s.omega, s.q);
}

StateEstimate solve_information(const Matrix& omega, const Vector& q) {
  const Eigen::Index n = omega.rows();
  if (q.size() != n || omega.cols() != n) {
    throw ConfigError("information matrix and vector dimensions differ");
  }
  if (n == 0) return {Vector(0), false};

  const Matrix sym = symmetrized(omega);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& values = eig.eigenvalues();
  if (values.minCoeff() >= kSingularEigenvalue) {
    Eigen::LDLT<Matrix> ldlt(sym);
    return {ldlt.solve(q), false};
  }

  // Minimum-norm least-squares solution through the pseudo-inverse.
  const double scale = std::max(std::abs(values.minCoeff()),
                                std::abs(values.maxCoeff()));
  const double cutoff =
      std::max(kSingularEigenvalue,
               scale * static_cast<double>(n) *
                   std::numeric_limits<double>::epsilon());
  Vector inv_values = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values[i]) > cutoff) inv_values[i] = 1.0 / values[i];
  }
  const Matrix& V = eig.eigenvectors();
  return {V * inv_values.asDiagonal() * (V.transpose() * q), true};
}

}  // namespace icfpie
