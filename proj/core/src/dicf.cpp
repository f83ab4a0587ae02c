#include "icfpie/dicf.hpp"

#include <string>

#include "icfpie/errors.hpp"

namespace icfpie {

StepOutput dicf_step(std::vector<NodeFilter>& nodes, const DicfParams& params,
                     const NodeMeasurements& measurements,
                     const SystemModel& sys, const Matrix& W,
                     BandwidthLedger* ledger, int t,
                     const StateVector* truth) {
  if (!params.net || !params.schedule) {
    throw ConfigError("dicf_step needs a network and a schedule");
  }
  const SensorNetwork& net = *params.net;
  const int n_nodes = net.size();
  if (static_cast<int>(nodes.size()) != n_nodes ||
      static_cast<int>(measurements.size()) != n_nodes) {
    throw ConfigError("one filter and one measurement slot per node required");
  }
  if (params.consensus_steps < 1) throw ConfigError("L must be >= 1");
  if (params.n_nodes < 1) throw ConfigError("N must be >= 1");
  const Eigen::Index n = sys.state_dim();

  StepOutput out;
  out.prior_estimates.reserve(nodes.size());

  // Local correction terms and consensus initialization.
  ConsensusState state;
  state.reserve(nodes.size());
  for (int i = 0; i < n_nodes; ++i) {
    NodeFilter& node = nodes[static_cast<std::size_t>(i)];
    if (node.prior.dim() != n) throw ConfigError("node state dimension mismatch");
    const StateEstimate prior_est = to_state_estimate(node.prior);
    out.prior_estimates.push_back(prior_est.x);

    Matrix d_omega = Matrix::Zero(n, n);
    Vector d_q = Vector::Zero(n);
    if (const auto& y = measurements[static_cast<std::size_t>(i)]) {
      const Matrix C = linearize(node.meas_model, prior_est.x);
      const Matrix V = spd_inverse(node.meas_model.meas_cov());
      const Vector y_bar =
          linearized_measurement(node.meas_model, *y, prior_est.x, C);
      CorrectionTerms terms = local_correction_terms(C, V, y_bar);
      d_omega = std::move(terms.delta_omega);
      d_q = std::move(terms.delta_q);
    }
    state.push_back(init_consensus(node.prior, d_omega, d_q, params.n_nodes));
  }

  ConsensusRun consensus =
      run_consensus(std::move(state), *params.schedule, params.consensus_steps,
                    net, params.eps, ledger, t);
  out.incomplete_cycle = consensus.incomplete_cycle;

  // Correction and prediction.
  const double N = static_cast<double>(params.n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    NodeFilter& node = nodes[static_cast<std::size_t>(i)];
    const NodeConsensus& final_pair = consensus.state[static_cast<std::size_t>(i)];

    InformationState posterior;
    posterior.omega = symmetrized(N * final_pair.B);
    const StateEstimate est = solve_information(final_pair.B, final_pair.b);
    if (est.singular) ++out.numerics.singular_solves;
    posterior.q = posterior.omega * est.x;

    node.prior = predict_with_estimate(posterior.omega, est.x, sys, W,
                                       &out.numerics);
    node.last_estimate = est.x;

    if (truth) out.errors.push_back(*truth - est.x);
    out.estimates.push_back(est.x);
    out.posteriors.push_back(std::move(posterior));
  }
  return out;
}

CkfStep ckf_step(const InformationState& central,
                 const NodeMeasurements& measurements,
                 std::span<const MeasurementModel> models,
                 const SystemModel& sys, const Matrix& W) {
  if (measurements.size() != models.size()) {
    throw ConfigError("one measurement slot per sensor model required");
  }
  CkfStep out;
  const StateEstimate prior_est = to_state_estimate(central);

  std::vector<SensorContribution> contributions;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!measurements[i]) continue;
    const MeasurementModel& model = models[i];
    const Matrix C = linearize(model, prior_est.x);
    contributions.push_back(
        {C, spd_inverse(model.meas_cov()),
         linearized_measurement(model, *measurements[i], prior_est.x, C)});
  }
  out.posterior = centralized_correct(central, contributions);

  const StateEstimate est = to_state_estimate(out.posterior);
  if (est.singular) ++out.numerics.singular_solves;
  out.estimate = est.x;
  out.next_prior =
      predict_with_estimate(out.posterior.omega, est.x, sys, W, &out.numerics);
  return out;
}

}  // namespace icfpie
