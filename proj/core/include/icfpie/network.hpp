#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "icfpie/models.hpp"

namespace icfpie {

struct Region {
  double x_min = 0.0;
  double x_max = 600.0;
  double y_min = 0.0;
  double y_max = 600.0;
};

/// Undirected single-hop sensor graph. neighborhoods()[i] is the closed
/// neighborhood of node i: its neighbors plus i itself, in ascending order.
class SensorNetwork {
 public:
  /// Edge (i, j) iff |p_i - p_j| <= comm_range.
  static SensorNetwork from_positions(std::vector<Eigen::Vector2d> positions,
                                      double comm_range, double sensing_range);
  /// Explicit topology; positions are optional (may be empty).
  static SensorNetwork from_adjacency(std::vector<std::vector<bool>> adjacency,
                                      std::vector<Eigen::Vector2d> positions = {},
                                      double sensing_range = 0.0);
  static SensorNetwork complete(int n_nodes);

  int size() const { return static_cast<int>(neighborhoods_.size()); }
  bool adjacent(int i, int j) const { return adjacency_[i][j]; }
  const std::vector<std::vector<bool>>& adjacency() const { return adjacency_; }
  const std::vector<int>& neighborhood(int i) const { return neighborhoods_[i]; }
  const std::vector<Eigen::Vector2d>& positions() const { return positions_; }
  double comm_range() const { return comm_range_; }
  double sensing_range() const { return sensing_range_; }

  // Degree of node i, not counting i itself.
  int degree(int i) const;
  int max_degree() const;
  bool connected() const;

  /// Whether node i is within sensing range of a planar target position.
  /// Networks without positions sense everything.
  bool senses(int i, const Eigen::Vector2d& target) const;

 private:
  SensorNetwork(std::vector<std::vector<bool>> adjacency,
                std::vector<Eigen::Vector2d> positions, double comm_range,
                double sensing_range);

  std::vector<std::vector<bool>> adjacency_;
  std::vector<std::vector<int>> neighborhoods_;
  std::vector<Eigen::Vector2d> positions_;
  double comm_range_ = 0.0;
  double sensing_range_ = 0.0;
};

/// Uniform placement in region, resampled until connected. Throws
/// PlacementError once max_retries placements have all been disconnected.
SensorNetwork random_geometric(int n_nodes, const Region& region,
                               double comm_range, double sensing_range,
                               Rng& rng, int max_retries = 1000);

/// 1 / (max_degree + 1): keeps I - eps * Laplacian row-stochastic with a
/// positive diagonal.
double consensus_gain(const SensorNetwork& net);

/// Scalars in one broadcast carrying `selected` rows of an n x n matrix plus
/// the matching `selected` vector entries.
inline std::int64_t broadcast_scalars(int selected, int n) {
  return static_cast<std::int64_t>(selected) * n + selected;
}

/// Per-broadcast scalar counts for one simulation run.
class BandwidthLedger {
 public:
  struct Record {
    int t;
    int l;
    int node;
    std::int64_t scalars;
  };

  explicit BandwidthLedger(int run = 0, bool keep_records = true)
      : run_(run), keep_records_(keep_records) {}

  void record_broadcast(int node, int t, int l, std::int64_t scalar_count);

  int run() const { return run_; }
  std::int64_t total() const { return total_; }
  std::int64_t total_for_node(int node) const;
  std::int64_t total_at(int t, int l) const;
  std::int64_t broadcasts() const { return broadcasts_; }
  const std::vector<Record>& records() const { return records_; }

  /// CSV with header run,t,l,node,scalars.
  void write_csv(std::ostream& out, bool header = true) const;

 private:
  int run_;
  bool keep_records_;
  std::int64_t total_ = 0;
  std::int64_t broadcasts_ = 0;
  std::vector<std::int64_t> per_node_;
  std::vector<Record> records_;
};

}  // namespace icfpie
