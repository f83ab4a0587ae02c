#include "icfpie/consensus.hpp"

#include <string>

#include "icfpie/errors.hpp"

namespace icfpie {

NodeConsensus init_consensus(const InformationState& prior,
                             const Matrix& delta_omega, const Vector& delta_q,
                             int n_nodes) {
  if (n_nodes < 1) throw ConfigError("node count N must be >= 1");
  if (delta_omega.rows() != prior.omega.rows() ||
      delta_q.size() != prior.q.size()) {
    throw ConfigError("correction terms do not match the prior dimension");
  }
  const double inv_n = 1.0 / static_cast<double>(n_nodes);
  return {prior.omega * inv_n + delta_omega, prior.q * inv_n + delta_q};
}

ConsensusState consensus_step(const ConsensusState& state,
                              const SensorNetwork& net,
                              std::span<const Vector> masks, double eps,
                              LedgerHook hook) {
  const int n_nodes = net.size();
  if (static_cast<int>(state.size()) != n_nodes ||
      static_cast<int>(masks.size()) != n_nodes) {
    throw ConfigError("consensus state, masks and network sizes differ");
  }
  if (!(eps > 0.0)) throw ConfigError("consensus gain must be positive");

  const Eigen::Index n = state.front().b.size();
  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(n_nodes));
  for (int j = 0; j < n_nodes; ++j) {
    const Vector& mask = masks[static_cast<std::size_t>(j)];
    if (mask.size() != n) throw ConfigError("mask dimension mismatch");
    for (Eigen::Index r = 0; r < n; ++r) {
      if (mask[r] != 0.0) rows[static_cast<std::size_t>(j)].push_back(r);
    }
    if (hook.ledger) {
      const auto selected =
          static_cast<int>(rows[static_cast<std::size_t>(j)].size());
      hook.ledger->record_broadcast(j, hook.t, hook.l,
                                    broadcast_scalars(selected, static_cast<int>(n)));
    }
  }

  ConsensusState next(state.size());
  for (int i = 0; i < n_nodes; ++i) {
    const NodeConsensus& own = state[static_cast<std::size_t>(i)];
    Matrix dB = Matrix::Zero(n, n);
    Vector db = Vector::Zero(n);
    for (int j : net.neighborhood(i)) {
      const NodeConsensus& other = state[static_cast<std::size_t>(j)];
      // Node j's payload: its selected rows of B and entries of b.
      for (Eigen::Index r : rows[static_cast<std::size_t>(j)]) {
        dB.row(r) += other.B.row(r) - own.B.row(r);
        db[r] += other.b[r] - own.b[r];
      }
    }
    NodeConsensus& out = next[static_cast<std::size_t>(i)];
    out.B = own.B + eps * dB;
    out.b = own.b + eps * db;
  }
  return next;
}

ConsensusRun run_consensus(ConsensusState state,
                           const EntrySelectionSchedule& schedule, int L,
                           const SensorNetwork& net, double eps,
                           BandwidthLedger* ledger, int t) {
  if (L < 1) throw ConfigError("consensus steps L must be >= 1");
  ConsensusRun out;
  out.incomplete_cycle = (L % schedule.theta_bar()) != 0;
  std::vector<Vector> masks(static_cast<std::size_t>(net.size()));
  for (int l = 0; l < L; ++l) {
    const Vector& mask = schedule.mask_at(l);
    for (Vector& m : masks) m = mask;
    state = consensus_step(state, net, masks, eps, {ledger, t, l + 1});
  }
  out.state = std::move(state);
  return out;
}

ConsensusRun run_consensus_heterogeneous(
    ConsensusState state, std::span<const EntrySelectionSchedule> schedules,
    int L, const SensorNetwork& net, double eps, BandwidthLedger* ledger,
    int t) {
  if (L < 1) throw ConfigError("consensus steps L must be >= 1");
  if (static_cast<int>(schedules.size()) != net.size()) {
    throw ConfigError("need one schedule per node");
  }
  ConsensusRun out;
  std::vector<Vector> masks(schedules.size());
  for (const EntrySelectionSchedule& s : schedules) {
    if (L % s.theta_bar() != 0) out.incomplete_cycle = true;
  }
  for (int l = 0; l < L; ++l) {
    for (std::size_t j = 0; j < schedules.size(); ++j) {
      masks[j] = schedules[j].mask_at(l);
    }
    state = consensus_step(state, net, masks, eps, {ledger, t, l + 1});
  }
  out.state = std::move(state);
  return out;
}

}  // namespace icfpie
