#include <gtest/gtest.h>

#include <random>

#include "icfpie/errors.hpp"
#include "icfpie/selection.hpp"

namespace icfpie {
namespace {

Vector diag(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(BuildSchedule, CaseOneAlternatesPositionVelocityPairs) {
  const auto s = EntrySelectionSchedule::from_one_based(4, {{1, 3}, {2, 4}});
  EXPECT_EQ(s.theta_bar(), 2);
  EXPECT_EQ(s.mask_at(0), diag({1, 0, 1, 0}));
  EXPECT_EQ(s.mask_at(1), diag({0, 1, 0, 1}));
  EXPECT_EQ(s.mask_at(2), diag({1, 0, 1, 0}));
}

TEST(BuildSchedule, CaseTwoSingleEntries) {
  const auto s = EntrySelectionSchedule::from_one_based(4, {{1}, {2}, {3}, {4}});
  EXPECT_EQ(s.theta_bar(), 4);
  EXPECT_EQ(s.mask_at(0), diag({1, 0, 0, 0}));
  EXPECT_EQ(s.mask_at(1), diag({0, 1, 0, 0}));
  EXPECT_EQ(s.mask_at(2), diag({0, 0, 1, 0}));
  EXPECT_EQ(s.mask_at(3), diag({0, 0, 0, 1}));
  EXPECT_EQ(s.mask_at(7), diag({0, 0, 0, 1}));
}

TEST(BuildSchedule, FullExchangeIsIdentity) {
  const auto s = EntrySelectionSchedule::from_one_based(4, {{1, 2, 3, 4}});
  EXPECT_EQ(s.theta_bar(), 1);
  for (long l = 0; l < 5; ++l) EXPECT_EQ(s.mask_matrix_at(l), Matrix::Identity(4, 4));
  EXPECT_EQ(EntrySelectionSchedule::identity(4).mask_at(3), Vector::Ones(4));
}

TEST(BuildSchedule, NamedCasesMatchConfigSubsets) {
  EXPECT_EQ(EntrySelectionSchedule::case1().subsets(),
            EntrySelectionSchedule::from_one_based(4, {{1, 3}, {2, 4}}).subsets());
  EXPECT_EQ(EntrySelectionSchedule::case2().theta_bar(), 4);
}

TEST(BuildSchedule, RejectsInvalidPartitions) {
  EXPECT_THROW(EntrySelectionSchedule::from_one_based(4, {{1, 2}, {2, 3, 4}}),
               SelectionError);
  EXPECT_THROW(EntrySelectionSchedule::from_one_based(4, {{1, 2}, {3}}),
               SelectionError);
  EXPECT_THROW(EntrySelectionSchedule::from_one_based(4, {{1, 2}, {}, {3, 4}}),
               SelectionError);
  EXPECT_THROW(EntrySelectionSchedule::from_one_based(4, {{0, 1}, {2, 3}}),
               SelectionError);
  EXPECT_THROW(EntrySelectionSchedule::build(4, {}), SelectionError);
}

TEST(ThetaBar, CeilOfRatio) {
  EXPECT_EQ(theta_bar_for(4, 2), 2);
  EXPECT_EQ(theta_bar_for(4, 1), 4);
  EXPECT_EQ(theta_bar_for(4, 4), 1);
  EXPECT_EQ(theta_bar_for(5, 2), 3);
  EXPECT_THROW(theta_bar_for(4, 5), ConfigError);
  EXPECT_THROW(theta_bar_for(4, 0), ConfigError);
}

// Random partitions: masks sum to I, are idempotent 0/1 diagonals, and
// repeat with period theta_bar.
TEST(ScheduleProperties, RandomPartitions) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 9)(rng);
    const int parts = std::uniform_int_distribution<int>(1, n)(rng);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<int>> subsets(static_cast<std::size_t>(parts));
    for (int i = 0; i < n; ++i) {
      const int owner = i < parts ? i : std::uniform_int_distribution<int>(0, parts - 1)(rng);
      subsets[static_cast<std::size_t>(owner)].push_back(perm[static_cast<std::size_t>(i)]);
    }
    const auto s = EntrySelectionSchedule::build(n, subsets);
    EXPECT_EQ(s.theta_bar(), parts);

    Matrix sum = Matrix::Zero(n, n);
    for (int z = 0; z < s.theta_bar(); ++z) {
      const Matrix T = s.mask_matrix_at(z);
      sum += T;
      EXPECT_EQ(T * T, T);
      EXPECT_TRUE(((T.array() == 0.0) || (T.array() == 1.0)).all());
      EXPECT_EQ(Matrix(T.diagonal().asDiagonal()), T);
    }
    EXPECT_EQ(sum, Matrix::Identity(n, n));
    for (long l = 0; l < 3L * s.theta_bar(); ++l) {
      EXPECT_EQ(s.mask_at(l), s.mask_at(l + s.theta_bar()));
    }
  }
}

}  // namespace
}  // namespace icfpie
