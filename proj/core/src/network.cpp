#include "icfpie/network.hpp"

#include <algorithm>
#include <ostream>
#include <queue>
#include <string>

#include "icfpie/errors.hpp"

namespace icfpie {

SensorNetwork::SensorNetwork(std::vector<std::vector<bool>> adjacency,
                             std::vector<Eigen::Vector2d> positions,
                             double comm_range, double sensing_range)
    : adjacency_(std::move(adjacency)),
      positions_(std::move(positions)),
      comm_range_(comm_range),
      sensing_range_(sensing_range) {
  const std::size_t n = adjacency_.size();
  if (!positions_.empty() && positions_.size() != n) {
    throw ConfigError("positions and adjacency sizes differ");
  }
  neighborhoods_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency_[i].size() != n) throw ConfigError("adjacency must be square");
    adjacency_[i][i] = false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency_[i][j] != adjacency_[j][i]) {
        throw ConfigError("adjacency must be symmetric");
      }
      if (i == j || adjacency_[i][j]) {
        neighborhoods_[i].push_back(static_cast<int>(j));
      }
    }
  }
}

SensorNetwork SensorNetwork::from_positions(
    std::vector<Eigen::Vector2d> positions, double comm_range,
    double sensing_range) {
  const std::size_t n = positions.size();
  std::vector<std::vector<bool>> adjacency(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool edge = (positions[i] - positions[j]).norm() <= comm_range;
      adjacency[i][j] = edge;
      adjacency[j][i] = edge;
    }
  }
  return SensorNetwork(std::move(adjacency), std::move(positions), comm_range,
                       sensing_range);
}

SensorNetwork SensorNetwork::from_adjacency(
    std::vector<std::vector<bool>> adjacency,
    std::vector<Eigen::Vector2d> positions, double sensing_range) {
  return SensorNetwork(std::move(adjacency), std::move(positions), 0.0,
                       sensing_range);
}

SensorNetwork SensorNetwork::complete(int n_nodes) {
  std::vector<std::vector<bool>> adjacency(
      static_cast<std::size_t>(n_nodes),
      std::vector<bool>(static_cast<std::size_t>(n_nodes), true));
  return SensorNetwork(std::move(adjacency), {}, 0.0, 0.0);
}

int SensorNetwork::degree(int i) const {
  return static_cast<int>(neighborhoods_[static_cast<std::size_t>(i)].size()) - 1;
}

int SensorNetwork::max_degree() const {
  int d = 0;
  for (int i = 0; i < size(); ++i) d = std::max(d, degree(i));
  return d;
}

bool SensorNetwork::connected() const {
  const int n = size();
  if (n == 0) return false;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j : neighborhood(i)) {
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

bool SensorNetwork::senses(int i, const Eigen::Vector2d& target) const {
  if (positions_.empty()) return true;
  return (positions_[static_cast<std::size_t>(i)] - target).norm() <=
         sensing_range_;
}

SensorNetwork random_geometric(int n_nodes, const Region& region,
                               double comm_range, double sensing_range,
                               Rng& rng, int max_retries) {
  if (n_nodes < 2) throw ConfigError("a sensor network needs at least 2 nodes");
  if (!(region.x_max > region.x_min) || !(region.y_max > region.y_min)) {
    throw ConfigError("placement region is degenerate");
  }
  std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
  std::uniform_real_distribution<double> uy(region.y_min, region.y_max);

  for (int attempt = 0; attempt < std::max(1, max_retries); ++attempt) {
    std::vector<Eigen::Vector2d> positions;
    positions.reserve(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
      const double x = ux(rng);
      const double y = uy(rng);
      positions.emplace_back(x, y);
    }
    SensorNetwork net = SensorNetwork::from_positions(std::move(positions),
                                                      comm_range, sensing_range);
    if (net.connected()) return net;
  }
  throw PlacementError("no connected placement of " + std::to_string(n_nodes) +
                       " nodes after " + std::to_string(max_retries) +
                       " attempts; enlarge the range or shrink the region");
}

double consensus_gain(const SensorNetwork& net) {
  return 1.0 / (static_cast<double>(net.max_degree()) + 1.0);
}

void BandwidthLedger::record_broadcast(int node, int t, int l,
                                       std::int64_t scalar_count) {
  if (scalar_count < 0) throw ConfigError("scalar count must be >= 0");
  if (node < 0) throw ConfigError("node id must be >= 0");
  if (static_cast<std::size_t>(node) >= per_node_.size()) {
    per_node_.resize(static_cast<std::size_t>(node) + 1, 0);
  }
  per_node_[static_cast<std::size_t>(node)] += scalar_count;
  total_ += scalar_count;
  ++broadcasts_;
  if (keep_records_) records_.push_back({t, l, node, scalar_count});
}

std::int64_t BandwidthLedger::total_for_node(int node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= per_node_.size()) return 0;
  return per_node_[static_cast<std::size_t>(node)];
}

std::int64_t BandwidthLedger::total_at(int t, int l) const {
  std::int64_t sum = 0;
  for (const Record& r : records_) {
    if (r.t == t && r.l == l) sum += r.scalars;
  }
  return sum;
}

void BandwidthLedger::write_csv(std::ostream& out, bool header) const {
  if (header) out << "run,t,l,node,scalars\n";
  for (const Record& r : records_) {
    out << run_ << ',' << r.t << ',' << r.l << ',' << r.node << ','
        << r.scalars << '\n';
  }
}

}  // namespace icfpie
