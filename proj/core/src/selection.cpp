#include "icfpie/selection.hpp"

#include <algorithm>
#include <string>

#include "icfpie/errors.hpp"

namespace icfpie {

EntrySelectionSchedule::EntrySelectionSchedule(int n,
                                               std::vector<IndexSet> subsets)
    : n_(n), subsets_(std::move(subsets)) {
  masks_.reserve(subsets_.size());
  for (const IndexSet& subset : subsets_) {
    Vector mask = Vector::Zero(n_);
    for (int r : subset) mask[r] = 1.0;
    masks_.push_back(std::move(mask));
  }
}

EntrySelectionSchedule EntrySelectionSchedule::build(
    int n, std::vector<IndexSet> subsets) {
  if (n < 1) throw ConfigError("state dimension must be >= 1");
  if (subsets.empty()) throw SelectionError("selection needs at least one subset");

  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t z = 0; z < subsets.size(); ++z) {
    IndexSet& subset = subsets[z];
    if (subset.empty()) {
      throw SelectionError("selection subset " + std::to_string(z + 1) +
                           " is empty");
    }
    std::sort(subset.begin(), subset.end());
    for (int r : subset) {
      if (r < 0 || r >= n) {
        throw SelectionError("selection index " + std::to_string(r + 1) +
                             " is outside 1.." + std::to_string(n));
      }
      if (owner[static_cast<std::size_t>(r)] != -1) {
        throw SelectionError("selection index " + std::to_string(r + 1) +
                             " appears in more than one subset");
      }
      owner[static_cast<std::size_t>(r)] = static_cast<int>(z);
    }
  }
  for (int r = 0; r < n; ++r) {
    if (owner[static_cast<std::size_t>(r)] == -1) {
      throw SelectionError("selection subsets do not cover index " +
                           std::to_string(r + 1));
    }
  }
  // With a partition of n entries into theta_bar nonempty subsets, every
  // subset size lies in [1, m] for m = max size.
  return EntrySelectionSchedule(n, std::move(subsets));
}

EntrySelectionSchedule EntrySelectionSchedule::from_one_based(
    int n, const std::vector<IndexSet>& subsets) {
  std::vector<IndexSet> zero_based = subsets;
  for (IndexSet& subset : zero_based) {
    for (int& r : subset) --r;
  }
  return build(n, std::move(zero_based));
}

EntrySelectionSchedule EntrySelectionSchedule::identity(int n) {
  IndexSet all(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) all[static_cast<std::size_t>(r)] = r;
  return build(n, {all});
}

EntrySelectionSchedule EntrySelectionSchedule::case1() {
  return build(4, {{0, 2}, {1, 3}});
}

EntrySelectionSchedule EntrySelectionSchedule::case2() {
  return build(4, {{0}, {1}, {2}, {3}});
}

const Vector& EntrySelectionSchedule::mask_at(long l) const {
  if (l < 0) throw ConfigError("consensus step index must be >= 0");
  return masks_[static_cast<std::size_t>(l % theta_bar())];
}

const EntrySelectionSchedule::IndexSet& EntrySelectionSchedule::subset_at(
    long l) const {
  if (l < 0) throw ConfigError("consensus step index must be >= 0");
  return subsets_[static_cast<std::size_t>(l % theta_bar())];
}

Matrix EntrySelectionSchedule::mask_matrix_at(long l) const {
  return mask_at(l).asDiagonal();
}

int EntrySelectionSchedule::max_subset_size() const {
  std::size_t m = 0;
  for (const IndexSet& s : subsets_) m = std::max(m, s.size());
  return static_cast<int>(m);
}

int theta_bar_for(int n, int m) {
  if (m < 1 || m > n) {
    throw ConfigError("selected entries per step must satisfy 1 <= m <= n");
  }
  return (n + m - 1) / m;
}

}  // namespace icfpie
