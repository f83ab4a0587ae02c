#pragma once

#include <span>
#include <vector>

#include "icfpie/models.hpp"

namespace icfpie {

/// Gaussian estimate in natural parameters: omega = P^-1, q = P^-1 x.
struct InformationState {
  Matrix omega;
  Vector q;

  static InformationState zero(Eigen::Index n);
  Eigen::Index dim() const { return q.size(); }
};

/// W = Q^-1 and V^i = (R^i)^-1.
struct NoiseInformation {
  Matrix w;
  std::vector<Matrix> v_per_node;
};

NoiseInformation noise_information(const Matrix& process_cov,
                                   std::span<const Matrix> meas_covs);

/// Counts of numerical fallbacks taken while filtering. Callers own one per
/// run; nothing here is shared.
struct NumericReport {
  int regularizations = 0;
  int singular_solves = 0;
  // Symmetric but indefinite matrices inverted through the LU fallback.
  int indefinite_inversions = 0;

  NumericReport& operator+=(const NumericReport& other) {
    regularizations += other.regularizations;
    singular_solves += other.singular_solves;
    indefinite_inversions += other.indefinite_inversions;
    return *this;
  }
};

// Threshold below which an information matrix is treated as singular.
inline constexpr double kSingularEigenvalue = 1e-10;

/// (Omega + Omega^T) / 2.
Matrix symmetrized(const Matrix& m);

/// Returns omega + lambda I with lambda = 1e-8 (1 + trace/n) when the smallest
/// eigenvalue of omega is below kSingularEigenvalue, else omega unchanged.
/// Increments report->regularizations when the shift is applied.
Matrix regularized(const Matrix& omega, NumericReport* report = nullptr);

/// Inverse of a symmetric positive-definite matrix via LDLT. Throws
/// NumericalError if the factorization is not positive definite.
Matrix spd_inverse(const Matrix& m);

/// Inverse of a symmetric matrix. Positive-definite input goes through LDLT;
/// invertible indefinite input (possible after partial consensus mixes rows
/// of different nodes) falls back to full-pivot LU and is counted in
/// report->indefinite_inversions. Throws NumericalError when singular.
Matrix symmetric_inverse(const Matrix& m, NumericReport* report = nullptr);

/// Ratio of extreme eigenvalues of a symmetric matrix; infinity when it is
/// not positive definite.
double condition_number(const Matrix& m);

struct CorrectionTerms {
  Matrix delta_omega;
  Vector delta_q;
};

/// delta_omega = C^T V C, delta_q = C^T V y.
CorrectionTerms local_correction_terms(const Matrix& C, const Matrix& V,
                                       const Vector& y);

struct SensorContribution {
  Matrix C;
  Matrix V;
  Vector y_bar;
};

/// Linearized measurement y_bar = y - h(x_prior) + C x_prior. For linear
/// models this equals y.
Vector linearized_measurement(const MeasurementModel& model, const Vector& y,
                              const StateVector& x_prior, const Matrix& C);

/// Centralized measurement update: sums every C^T V C and C^T V y_bar into the
/// prior.
InformationState centralized_correct(
    const InformationState& prior,
    std::span<const SensorContribution> contributions);

/// Time update for a linear transition: x+ = A x, Omega+ = (A Omega^-1 A^T +
/// W^-1)^-1, q+ = Omega+ x+.
InformationState predict(const InformationState& post, const Matrix& A,
                         const Matrix& W, NumericReport* report = nullptr);

/// Time update through a general system model, linearized at the posterior
/// estimate.
InformationState predict(const InformationState& post,
                         const SystemModel& sys, const Matrix& W,
                         NumericReport* report = nullptr);

/// Time update from an already-computed posterior estimate x_post, as done by
/// consensus nodes that solve for x from their consensus pair.
InformationState predict_with_estimate(const Matrix& omega_post,
                                       const StateVector& x_post,
                                       const SystemModel& sys, const Matrix& W,
                                       NumericReport* report = nullptr);

struct StateEstimate {
  StateVector x;
  bool singular = false;
};

/// Omega^-1 q, or the minimum-norm least-squares solution when omega is
/// singular.
StateEstimate to_state_estimate(const InformationState& s);
StateEstimate solve_information(const Matrix& omega, const Vector& q);

}  // namespace icfpie
