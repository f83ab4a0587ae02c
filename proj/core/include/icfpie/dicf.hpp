#pragma once

#include <optional>
#include <span>
#include <vector>

#include "icfpie/consensus.hpp"
#include "icfpie/info_filter.hpp"
#include "icfpie/models.hpp"
#include "icfpie/network.hpp"
#include "icfpie/selection.hpp"

namespace icfpie {

/// State a sensor node carries between time steps.
struct NodeFilter {
  int node_id = 0;
  InformationState prior;
  MeasurementModel meas_model;
  StateVector last_estimate;
};

/// Per-node measurement for one time step; nullopt when the node does not
/// sense the target and therefore contributes no local correction.
using NodeMeasurements = std::vector<std::optional<Vector>>;

struct StepOutput {
  std::vector<InformationState> posteriors;
  std::vector<StateVector> estimates;
  std::vector<StateVector> prior_estimates;
  // truth - posterior estimate; empty when no truth was supplied.
  std::vector<Vector> errors;
  NumericReport numerics;
  bool incomplete_cycle = false;
};

struct DicfParams {
  const SensorNetwork* net = nullptr;
  const EntrySelectionSchedule* schedule = nullptr;
  int consensus_steps = 1;
  double eps = 0.0;
  // N, the node count every node assumes for the 1/N and N scalings.
  int n_nodes = 0;
};

/// One time step of the partial-information consensus filter at every node:
/// local correction, L masked consensus steps, correction by N B(L), and
/// prediction. `nodes` is updated in place with the next priors.
StepOutput dicf_step(std::vector<NodeFilter>& nodes, const DicfParams& params,
                     const NodeMeasurements& measurements,
                     const SystemModel& sys, const Matrix& W,
                     BandwidthLedger* ledger = nullptr, int t = 0,
                     const StateVector* truth = nullptr);

struct CkfStep {
  InformationState posterior;
  StateVector estimate;
  InformationState next_prior;
  NumericReport numerics;
};

/// Centralized information filter cycle: fuse every available measurement,
/// then predict.
CkfStep ckf_step(const InformationState& central,
                 const NodeMeasurements& measurements,
                 std::span<const MeasurementModel> models,
                 const SystemModel& sys, const Matrix& W);

}  // namespace icfpie
