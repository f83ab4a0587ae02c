#pragma once

#include <span>
#include <vector>

#include "icfpie/info_filter.hpp"
#include "icfpie/network.hpp"
#include "icfpie/selection.hpp"

namespace icfpie {

struct NodeConsensus {
  Matrix B;
  Vector b;
};

/// One (B, b) pair per node, indexed by node id.
using ConsensusState = std::vector<NodeConsensus>;

/// B0 = Omega_prior / N + delta_omega, b0 = q_prior / N + delta_q.
NodeConsensus init_consensus(const InformationState& prior,
                             const Matrix& delta_omega, const Vector& delta_q,
                             int n_nodes);

/// Where a consensus step's ledger entries go.
struct LedgerHook {
  BandwidthLedger* ledger = nullptr;
  int t = 0;
  int l = 0;  // 1-based consensus step
};

/// One simultaneous step of
///   B_i <- B_i + eps * sum_{j in N_i} T_j (B_j - B_i)
/// and the same for b. masks[j] is the diagonal of node j's selection matrix;
/// rows outside T_j are not part of j's broadcast and receive nothing from j.
ConsensusState consensus_step(const ConsensusState& state,
                              const SensorNetwork& net,
                              std::span<const Vector> masks, double eps,
                              LedgerHook hook = {});

struct ConsensusRun {
  ConsensusState state;
  // L was not a multiple of theta_bar.
  bool incomplete_cycle = false;
};

/// L consensus steps, every node using mask_at(schedule, l) at step l.
ConsensusRun run_consensus(ConsensusState state,
                           const EntrySelectionSchedule& schedule, int L,
                           const SensorNetwork& net, double eps,
                           BandwidthLedger* ledger = nullptr, int t = 0);

/// Per-node schedules; nodes may broadcast different entries at the same
/// step. Experimental: convergence to the centralized filter needs identical
/// schedules.
ConsensusRun run_consensus_heterogeneous(
    ConsensusState state, std::span<const EntrySelectionSchedule> schedules,
    int L, const SensorNetwork& net, double eps,
    BandwidthLedger* ledger = nullptr, int t = 0);

}  // namespace icfpie
