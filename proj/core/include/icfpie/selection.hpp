#pragma once

#include <cstddef>
#include <vector>

#include "icfpie/models.hpp"

namespace icfpie {

/// Cyclic family of diagonal 0/1 entry-selection masks.
///
/// Subsets are stored 0-based. Together they must partition {0..n-1}; the
/// mask used at consensus step l is the one for subset l mod theta_bar.
class EntrySelectionSchedule {
 public:
  using IndexSet = std::vector<int>;

  /// Validates the partition and builds one mask per subset. Indices are
  /// 0-based here; see from_one_based() for config input.
  static EntrySelectionSchedule build(int n, std::vector<IndexSet> subsets);
  static EntrySelectionSchedule from_one_based(
      int n, const std::vector<IndexSet>& subsets);

  static EntrySelectionSchedule identity(int n);
  // Table-3 style alternation over {x, vx} / {y, vy} for n = 4.
  static EntrySelectionSchedule case1();
  // One state entry per step for n = 4.
  static EntrySelectionSchedule case2();

  int n() const { return n_; }
  int theta_bar() const { return static_cast<int>(subsets_.size()); }
  const std::vector<IndexSet>& subsets() const { return subsets_; }

  /// Diagonal of the mask for consensus step l (1.0 selected, 0.0 not).
  const Vector& mask_at(long l) const;
  const IndexSet& subset_at(long l) const;
  Matrix mask_matrix_at(long l) const;

  // Largest subset size, i.e. m.
  int max_subset_size() const;

 private:
  EntrySelectionSchedule(int n, std::vector<IndexSet> subsets);

  int n_;
  std::vector<IndexSet> subsets_;
  std::vector<Vector> masks_;
};

/// ceil(n / m) for 1 <= m <= n.
int theta_bar_for(int n, int m);

}  // namespace icfpie
