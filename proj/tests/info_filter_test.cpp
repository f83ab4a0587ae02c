#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "icfpie/errors.hpp"
#include "icfpie/info_filter.hpp"
#include "oracles.hpp"

namespace icfpie {
namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

TEST(LocalCorrection, PositionSensorAtReferenceStart) {
  const Matrix C = position_observation_matrix();
  const Matrix V = Eigen::Vector2d(0.04, 0.04).asDiagonal();
  const auto terms = local_correction_terms(C, V, Eigen::Vector2d(400, 0));
  EXPECT_LT(max_abs(terms.delta_omega -
                    Matrix(Eigen::Vector4d(0.04, 0.04, 0, 0).asDiagonal())),
            1e-15);
  EXPECT_LT(max_abs(terms.delta_q - Eigen::Vector4d(16, 0, 0, 0)), 1e-12);
}

TEST(LocalCorrection, ZeroObservationMatrix) {
  const auto terms =
      local_correction_terms(Matrix::Zero(2, 4), Matrix::Identity(2, 2),
                             Eigen::Vector2d(3, 4));
  EXPECT_EQ(terms.delta_omega, Matrix::Zero(4, 4));
  EXPECT_EQ(terms.delta_q, Vector::Zero(4));
}

TEST(LocalCorrection, MatchesTripleLoopProduct) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix C = oracle::random_matrix(2, 4, rng);
    const Vector y = oracle::random_vector(2, rng);
    const auto terms = local_correction_terms(C, Matrix::Identity(2, 2), y);
    const Matrix expected = oracle::triple_loop_product(C.transpose(), C);
    EXPECT_LT(max_abs(terms.delta_omega - expected), 1e-12);
    EXPECT_LT(max_abs(terms.delta_q - oracle::triple_loop_product(C.transpose(), y)),
              1e-12);
  }
}

TEST(LocalCorrection, DimensionMismatch) {
  EXPECT_THROW(local_correction_terms(Matrix::Zero(2, 4), Matrix::Identity(3, 3),
                                      Vector::Zero(2)),
               ConfigError);
  EXPECT_THROW(local_correction_terms(Matrix::Zero(2, 4), Matrix::Identity(2, 2),
                                      Vector::Zero(3)),
               ConfigError);
}

TEST(CentralizedCorrect, IdentityCase) {
  const InformationState prior{Matrix::Identity(2, 2), Vector::Zero(2)};
  const std::vector<SensorContribution> c{
      {Matrix::Identity(2, 2), Matrix::Identity(2, 2), Eigen::Vector2d(1, 1)}};
  const InformationState post = centralized_correct(prior, c);
  EXPECT_EQ(post.omega, Matrix(2.0 * Matrix::Identity(2, 2)));
  EXPECT_EQ(post.q, Vector(Eigen::Vector2d(1, 1)));
}

TEST(CentralizedCorrect, TenIdenticalSensorsScaleLinearly) {
  const Matrix C = position_observation_matrix();
  const Matrix V = Eigen::Vector2d(0.04, 0.04).asDiagonal();
  std::vector<SensorContribution> c(10, {C, V, Eigen::Vector2d(1, 2)});
  const InformationState post =
      centralized_correct(InformationState::zero(4), c);
  EXPECT_LT(max_abs(post.omega - Matrix(Eigen::Vector4d(0.4, 0.4, 0, 0).asDiagonal())),
            1e-14);
}

TEST(CentralizedCorrect, EmptyContributionsLeavePriorUnchanged) {
  std::mt19937_64 rng(3);
  const InformationState prior{oracle::random_spd(4, rng), oracle::random_vector(4, rng)};
  const InformationState post = centralized_correct(prior, {});
  EXPECT_LT(max_abs(post.omega - prior.omega), 1e-15);
  EXPECT_EQ(post.q, prior.q);
}

TEST(CentralizedCorrect, OrderIndependent) {
  std::mt19937_64 rng(5);
  std::vector<SensorContribution> c;
  for (int i = 0; i < 6; ++i) {
    c.push_back({oracle::random_matrix(2, 4, rng), oracle::random_spd(2, rng),
                 oracle::random_vector(2, rng)});
  }
  const InformationState prior{oracle::random_spd(4, rng), oracle::random_vector(4, rng)};
  const InformationState ref = centralized_correct(prior, c);
  std::vector<int> order(c.size());
  std::iota(order.begin(), order.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<SensorContribution> permuted;
    for (int k : order) permuted.push_back(c[static_cast<std::size_t>(k)]);
    const InformationState p = centralized_correct(prior, permuted);
    EXPECT_LT(max_abs(p.omega - ref.omega), 1e-12);
    EXPECT_LT(max_abs(p.q - ref.q), 1e-12);
  }
}

TEST(Predict, SymmetricHalving) {
  const InformationState post{Matrix::Identity(4, 4), Vector::Zero(4)};
  NumericReport report;
  const InformationState next =
      predict(post, Matrix::Identity(4, 4), Matrix::Identity(4, 4), &report);
  EXPECT_LT(max_abs(next.omega - 0.5 * Matrix::Identity(4, 4)), 1e-15);
  EXPECT_EQ(next.q, Vector::Zero(4));
  EXPECT_EQ(report.regularizations, 0);
}

TEST(Predict, ReferenceNoiseInformation) {
  const Matrix Q = Eigen::Vector4d(10, 10, 1, 1).asDiagonal();
  const std::vector<Matrix> Rs{Eigen::Vector2d(25, 25).asDiagonal()};
  const NoiseInformation info = noise_information(Q, Rs);
  EXPECT_LT(max_abs(info.w - Matrix(Eigen::Vector4d(0.1, 0.1, 1, 1).asDiagonal())),
            1e-15);
  EXPECT_LT(max_abs(info.v_per_node[0] -
                    Matrix(Eigen::Vector2d(0.04, 0.04).asDiagonal())),
            1e-15);
}

TEST(Predict, MatchesCovarianceRecursion) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix P = oracle::random_spd(4, rng);
    const Matrix Q = oracle::random_spd(4, rng);
    const Matrix A = oracle::random_matrix(4, 4, rng);
    const Vector x = oracle::random_vector(4, rng);
    const Matrix omega = P.inverse();
    const InformationState post{omega, omega * x};

    const InformationState next = predict(post, A, Q.inverse());
    const Matrix P_next = A * P * A.transpose() + Q;
    const Matrix P_from_info = next.omega.inverse();
    EXPECT_LT(max_abs(P_from_info - P_next) / max_abs(P_next), 1e-10);
    const Vector x_next = next.omega.ldlt().solve(next.q);
    EXPECT_LT((x_next - A * x).norm() / (1.0 + (A * x).norm()), 1e-10);
  }
}

TEST(Predict, PreservesSymmetryAndDefiniteness) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const InformationState post{oracle::random_spd(4, rng), oracle::random_vector(4, rng)};
    const InformationState next = predict(post, oracle::random_matrix(4, 4, rng),
                                          oracle::random_spd(4, rng));
    EXPECT_LT(max_abs(next.omega - next.omega.transpose()), 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(next.omega);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Predict, SingularInformationIsRegularizedAndFlagged) {
  const InformationState post{Matrix(Eigen::Vector4d(0.4, 0.4, 0, 0).asDiagonal()),
                              Eigen::Vector4d(160, 0, 0, 0)};
  NumericReport report;
  const InformationState next =
      predict(post, constant_velocity_matrix(0.1),
              Matrix(Eigen::Vector4d(0.1, 0.1, 1, 1).asDiagonal()), &report);
  EXPECT_EQ(report.regularizations, 1);
  EXPECT_TRUE(next.omega.allFinite());
  // Position estimate carried through unchanged (zero velocity estimate).
  const Vector x = to_state_estimate(next).x;
  EXPECT_NEAR(x[0], 400.0, 1e-6);
}

TEST(Regularized, ShiftFollowsTrace) {
  const Matrix omega = Eigen::Vector4d(2, 2, 0, 0).asDiagonal();
  NumericReport report;
  const Matrix r = regularized(omega, &report);
  const double lambda = 1e-8 * (1.0 + 4.0 / 4.0);
  EXPECT_DOUBLE_EQ(r(2, 2), lambda);
  EXPECT_DOUBLE_EQ(r(0, 0), 2.0 + lambda);
  EXPECT_EQ(report.regularizations, 1);
  EXPECT_EQ(regularized(Matrix::Identity(3, 3), &report), Matrix::Identity(3, 3));
  EXPECT_EQ(report.regularizations, 1);
}

TEST(SymmetricInverse, IndefiniteFallbackIsCounted) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  NumericReport report;
  const Matrix inv = symmetric_inverse(m, &report);
  EXPECT_LT(max_abs(inv * m - Matrix::Identity(2, 2)), 1e-14);
  EXPECT_EQ(report.indefinite_inversions, 1);
  EXPECT_THROW(symmetric_inverse(Matrix::Zero(2, 2)), NumericalError);
  EXPECT_THROW(spd_inverse(m), NumericalError);
}

TEST(ToStateEstimate, DiagonalSolve) {
  const StateEstimate e =
      to_state_estimate({2.0 * Matrix::Identity(2, 2), Eigen::Vector2d(4, 6)});
  EXPECT_FALSE(e.singular);
  EXPECT_LT((e.x - Eigen::Vector2d(2, 3)).norm(), 1e-15);
}

TEST(ToStateEstimate, ZeroInformationIsSingularZero) {
  const StateEstimate e = to_state_estimate(InformationState::zero(4));
  EXPECT_TRUE(e.singular);
  EXPECT_EQ(e.x, Vector::Zero(4));
}

TEST(ToStateEstimate, RankDeficientMinimumNorm) {
  const StateEstimate e = to_state_estimate(
      {Matrix(Eigen::Vector4d(1, 1, 0, 0).asDiagonal()), Eigen::Vector4d(3, 4, 0, 0)});
  EXPECT_TRUE(e.singular);
  EXPECT_LT((e.x - Eigen::Vector4d(3, 4, 0, 0)).norm(), 1e-14);
}

TEST(ToStateEstimate, MatchesCompleteOrthogonalDecomposition) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix G = oracle::random_matrix(4, 2, rng);
    const Matrix omega = G * G.transpose();  // rank 2
    const Vector q = oracle::random_vector(4, rng);
    const Vector expected = omega.completeOrthogonalDecomposition().solve(q);
    const StateEstimate e = to_state_estimate({omega, q});
    EXPECT_TRUE(e.singular);
    EXPECT_LT((e.x - expected).norm() / (1.0 + expected.norm()), 1e-8);
  }
}

// Information-form correct + predict over 50 steps equals the covariance
// form on random well-conditioned systems.
TEST(InformationForm, EquivalentToCovarianceForm) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix A = oracle::random_matrix(4, 4, rng);
    A /= std::max(1.0, A.jacobiSvd().singularValues()[0]);  // keep bounded
    const Matrix Q = oracle::random_spd(4, rng);
    std::vector<Matrix> Cs{oracle::random_matrix(2, 4, rng),
                           oracle::random_matrix(2, 4, rng)};
    std::vector<Matrix> Rs{oracle::random_spd(2, rng), oracle::random_spd(2, rng)};

    const Matrix P0 = oracle::random_spd(4, rng);
    const Vector x0 = oracle::random_vector(4, rng);
    oracle::CovarianceKf kf{x0, P0};
    InformationState info{P0.inverse(), P0.inverse() * x0};
    const Matrix W = Q.inverse();

    for (int step = 0; step < 50; ++step) {
      std::vector<Vector> ys{oracle::random_vector(2, rng), oracle::random_vector(2, rng)};
      kf.correct(Cs, Rs, ys);
      std::vector<SensorContribution> c;
      for (std::size_t s = 0; s < 2; ++s) c.push_back({Cs[s], Rs[s].inverse(), ys[s]});
      info = centralized_correct(info, c);

      const Vector x_info = to_state_estimate(info).x;
      EXPECT_LT((x_info - kf.x).norm() / (1.0 + kf.x.norm()), 1e-9);
      EXPECT_LT(max_abs(info.omega.inverse() - kf.P) / max_abs(kf.P), 1e-9);

      kf.predict(A, Q);
      info = predict(info, A, W);
    }
  }
}

}  // namespace
}  // namespace icfpie
