#include "icfpie/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "icfpie/errors.hpp"

namespace icfpie {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent streams per purpose so changing one draw count (e.g. placement
// retries) does not shift the others.
enum class Stream : std::uint64_t { kPlacement = 1, kTruth = 2, kMeasurement = 3 };

Rng stream_rng(std::uint64_t seed, Stream s) {
  return Rng(splitmix64(seed ^ (static_cast<std::uint64_t>(s) << 56)));
}

double error_norm(const Vector& err, ErrorMetric metric) {
  if (metric == ErrorMetric::kPosition) return err.head(2).norm();
  return err.norm();
}

struct EigenRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;

  void add(const Matrix& omega) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(omega, Eigen::EigenvaluesOnly);
    lo = std::min(lo, eig.eigenvalues().minCoeff());
    hi = std::max(hi, eig.eigenvalues().maxCoeff());
  }
};

// Per-step bookkeeping shared by the distributed and centralized loops.
class SeriesRecorder {
 public:
  SeriesRecorder(const Scenario& sc, AlgorithmSpec spec, int n_nodes)
      : sc_(sc), steps_(static_cast<int>(sc.truth.size())) {
    m_.spec = std::move(spec);
    m_.avg_error_norm.reserve(static_cast<std::size_t>(steps_));
    m_.avg_prior_error_norm.reserve(static_cast<std::size_t>(steps_));
    m_.node_mse_tail.assign(static_cast<std::size_t>(n_nodes), 0.0);
  }

  bool after_transient(int k) const {
    return time(k) > kTransientSeconds + 1e-9;
  }
  bool in_tail(int k) const {
    return time(k) > sc_.cfg.horizon - kTailSeconds + 1e-9;
  }

  void record(int k, const std::vector<StateVector>& estimates,
              const std::vector<StateVector>& prior_estimates,
              const std::vector<const Matrix*>& posteriors,
              int regularizations) {
    const StateVector& truth = sc_.truth[static_cast<std::size_t>(k)];
    double sum = 0.0;
    double prior_sum = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      const double e = error_norm(truth - estimates[i], sc_.cfg.error_metric);
      const double ep =
          error_norm(truth - prior_estimates[i], sc_.cfg.error_metric);
      if (!std::isfinite(e) || !std::isfinite(ep)) {
        throw NumericalError(m_.spec.label() + " diverged at step " +
                             std::to_string(k + 1));
      }
      sum += e;
      prior_sum += ep;
      if (in_tail(k)) {
        m_.node_mse_tail[i] += e * e;
        ++tail_counts_;
      }
    }
    const auto count = static_cast<double>(estimates.size());
    m_.avg_error_norm.push_back(sum / count);
    m_.avg_prior_error_norm.push_back(prior_sum / count);

    m_.regularizations += regularizations;
    if (after_transient(k)) {
      m_.regularizations_after_transient += regularizations;
      for (const Matrix* omega : posteriors) range_.add(*omega);
    }
  }

  SeriesMetrics finish(std::int64_t total_scalars) {
    const std::size_t nodes = m_.node_mse_tail.size();
    const double per_node = nodes ? static_cast<double>(tail_counts_) /
                                        static_cast<double>(nodes)
                                  : 0.0;
    for (double& v : m_.node_mse_tail) v = per_node > 0 ? v / per_node : 0.0;
    m_.final_error = m_.avg_error_norm.empty() ? 0.0 : m_.avg_error_norm.back();
    m_.lambda_min = range_.lo;
    m_.lambda_max = range_.hi;
    m_.total_scalars = total_scalars;
    m_.finite = std::isfinite(m_.final_error);
    return std::move(m_);
  }

 private:
  double time(int k) const { return (k + 1) * sc_.cfg.dt; }

  const Scenario& sc_;
  int steps_;
  SeriesMetrics m_;
  EigenRange range_;
  long tail_counts_ = 0;
};

SeriesMetrics run_distributed(const Scenario& sc, int L,
                              const AlgorithmSpec& spec,
                              BandwidthLedger& ledger) {
  const int n = sc.cfg.state_dim();
  const EntrySelectionSchedule schedule =
      spec.alg == Algorithm::kIcf ? EntrySelectionSchedule::identity(n)
                                  : spec.selection.schedule(n);
  DicfParams params;
  params.net = &sc.network;
  params.schedule = &schedule;
  params.consensus_steps = L;
  params.eps = sc.eps();
  params.n_nodes = sc.network.size();

  std::vector<NodeFilter> nodes = sc.initial_filters();
  SeriesRecorder rec(sc, spec, sc.network.size());
  std::vector<const Matrix*> posteriors;
  for (int k = 0; k < static_cast<int>(sc.truth.size()); ++k) {
    const StepOutput out = dicf_step(nodes, params,
                                     sc.measurements[static_cast<std::size_t>(k)],
                                     sc.system, sc.W, &ledger, k + 1);
    posteriors.clear();
    for (const InformationState& p : out.posteriors) posteriors.push_back(&p.omega);
    rec.record(k, out.estimates, out.prior_estimates, posteriors,
               out.numerics.regularizations);
  }
  return rec.finish(ledger.total());
}

SeriesMetrics run_centralized(const Scenario& sc, const AlgorithmSpec& spec) {
  InformationState central = sc.initial_prior();
  SeriesRecorder rec(sc, spec, 1);
  for (int k = 0; k < static_cast<int>(sc.truth.size()); ++k) {
    const StateVector prior_est = to_state_estimate(central).x;
    CkfStep step = ckf_step(central, sc.measurements[static_cast<std::size_t>(k)],
                            sc.meas_models, sc.system, sc.W);
    rec.record(k, {step.estimate}, {prior_est}, {&step.posterior.omega},
               step.numerics.regularizations);
    central = std::move(step.next_prior);
  }
  return rec.finish(0);
}

}  // namespace

// ----------------------------------------------------------------------------
// Config helpers

SelectionCase SelectionCase::case1() { return {"1", {{1, 3}, {2, 4}}}; }
SelectionCase SelectionCase::case2() { return {"2", {{1}, {2}, {3}, {4}}}; }

SelectionCase SelectionCase::identity(int n) {
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) all[static_cast<std::size_t>(r)] = r + 1;
  return {"identity", {all}};
}

SelectionCase SelectionCase::custom(std::vector<std::vector<int>> subsets) {
  return {"custom", std::move(subsets)};
}

EntrySelectionSchedule SelectionCase::schedule(int n) const {
  if (label == "identity") return EntrySelectionSchedule::identity(n);
  return EntrySelectionSchedule::from_one_based(n, subsets);
}

int ScenarioConfig::steps() const {
  return static_cast<int>(std::llround(horizon / dt));
}

TruthModel ScenarioConfig::truth_model() const {
  TruthModel t;
  t.initial_position = target_position;
  t.speed_min = speed_min;
  t.speed_max = speed_max;
  t.heading_min = heading_min;
  t.heading_max = heading_max;
  t.speed_variance = speed_variance;
  t.dt = dt;
  return t;
}

Matrix ScenarioConfig::process_cov() const {
  return Eigen::Map<const Vector>(process_cov_diag.data(),
                                  static_cast<Eigen::Index>(process_cov_diag.size()))
      .asDiagonal();
}

Matrix ScenarioConfig::meas_cov() const {
  return Eigen::Map<const Vector>(meas_cov_diag.data(),
                                  static_cast<Eigen::Index>(meas_cov_diag.size()))
      .asDiagonal();
}

void ScenarioConfig::validate() const {
  if (n_nodes < 1) throw ConfigError("n_nodes must be >= 1");
  if (!(comm_range > 0.0)) throw ConfigError("comm_range must be positive");
  if (!(sensing_range >= 0.0)) throw ConfigError("sensing_range must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(horizon >= dt)) throw ConfigError("horizon must be at least one step");
  if (state_dim() != 4) {
    throw ConfigError("the tracking scenario uses a 4-entry [x, y, vx, vy] state");
  }
  if (meas_cov_diag.size() != 2) {
    throw ConfigError("meas_cov must have 2 entries (position readout)");
  }
  for (double v : process_cov_diag) {
    if (!(v > 0.0)) throw ConfigError("process_cov entries must be positive");
  }
  for (double v : meas_cov_diag) {
    if (!(v > 0.0)) throw ConfigError("meas_cov entries must be positive");
  }
  if (static_cast<int>(initial_estimate.size()) != state_dim()) {
    throw ConfigError("initial_estimate must have one entry per state");
  }
  if (!(initial_information >= 0.0)) {
    throw ConfigError("initial_information must be >= 0");
  }
  if (selections.empty()) throw ConfigError("at least one selection case required");
  for (const SelectionCase& s : selections) (void)s.schedule(state_dim());
  if (consensus_steps < 1) throw ConfigError("consensus_steps must be >= 1");
  for (int l : sweep) {
    if (l < 1) throw ConfigError("sweep values must be >= 1");
  }
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0 (0 = automatic)");
  if (mc_runs < 1) throw ConfigError("runs must be >= 1");
  truth_model().validate();
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run) {
  return splitmix64(master + run);
}

// ----------------------------------------------------------------------------
// Scenario

InformationState Scenario::initial_prior() const {
  const int n = cfg.state_dim();
  InformationState s;
  s.omega = cfg.initial_information * Matrix::Identity(n, n);
  s.q = s.omega *
        Eigen::Map<const Vector>(cfg.initial_estimate.data(), n);
  return s;
}

std::vector<NodeFilter> Scenario::initial_filters() const {
  std::vector<NodeFilter> nodes;
  nodes.reserve(meas_models.size());
  const InformationState prior = initial_prior();
  const Vector x0 = Eigen::Map<const Vector>(cfg.initial_estimate.data(),
                                             cfg.state_dim());
  for (const MeasurementModel& m : meas_models) {
    nodes.push_back(NodeFilter{m.node_id(), prior, m, x0});
  }
  return nodes;
}

double Scenario::eps() const {
  return cfg.epsilon > 0.0 ? cfg.epsilon : consensus_gain(network);
}

Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng placement = stream_rng(seed, Stream::kPlacement);
  if (cfg.n_nodes == 1) {
    // A lone node is trivially connected; random_geometric needs two.
    std::uniform_real_distribution<double> ux(cfg.region.x_min, cfg.region.x_max);
    std::uniform_real_distribution<double> uy(cfg.region.y_min, cfg.region.y_max);
    const double x = ux(placement);
    const double y = uy(placement);
    return build_scenario(cfg, seed,
                          SensorNetwork::from_positions({{x, y}}, cfg.comm_range,
                                                        cfg.sensing_range));
  }
  SensorNetwork net = random_geometric(cfg.n_nodes, cfg.region, cfg.comm_range,
                                       cfg.sensing_range, placement,
                                       cfg.max_placement_retries);
  return build_scenario(cfg, seed, std::move(net));
}

Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                        SensorNetwork network) {
  cfg.validate();
  const Matrix Q = cfg.process_cov();
  Scenario sc{cfg,
              seed,
              std::move(network),
              cfg.truth_model(),
              SystemModel::linear(constant_velocity_matrix(cfg.dt), Q),
              symmetrized(spd_inverse(Q)),
              {},
              {},
              {},
              0,
              0};

  const Matrix C = position_observation_matrix();
  const Matrix R = cfg.meas_cov();
  for (int i = 0; i < sc.network.size(); ++i) {
    sc.meas_models.push_back(MeasurementModel::linear(i, C, R));
  }

  Rng truth_rng = stream_rng(seed, Stream::kTruth);
  Rng meas_rng = stream_rng(seed, Stream::kMeasurement);
  StateVector x = sample_initial_truth(sc.truth_model, truth_rng);

  const int steps = cfg.steps();
  sc.truth.reserve(static_cast<std::size_t>(steps));
  sc.measurements.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    sc.truth.push_back(x);
    NodeMeasurements ys(static_cast<std::size_t>(sc.network.size()));
    const Eigen::Vector2d target = x.head<2>();
    for (int i = 0; i < sc.network.size(); ++i) {
      // Always drawn so the noise stream does not depend on coverage.
      Vector y = sample_measurement(x, sc.meas_models[static_cast<std::size_t>(i)],
                                    meas_rng);
      if (sc.network.senses(i, target)) {
        ys[static_cast<std::size_t>(i)] = std::move(y);
      } else {
        ++sc.unsensed_node_steps;
      }
    }
    sc.measurements.push_back(std::move(ys));

    if (cfg.truth_noise == TruthNoise::kProcess) {
      x = sc.system.transition(x) + sample_gaussian(Q, truth_rng);
    } else {
      TruthStep next = propagate_truth(x, sc.truth_model, truth_rng);
      if (next.degenerate_heading) ++sc.degenerate_heading_steps;
      x = std::move(next.state);
    }
  }
  return sc;
}

// ----------------------------------------------------------------------------
// Runs

std::string to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::kIcfPie: return "icf-pie";
    case Algorithm::kIcf: return "icf";
    case Algorithm::kCkf: return "ckf";
  }
  return "unknown";
}

std::string AlgorithmSpec::label() const { return to_string(alg); }

std::string AlgorithmSpec::case_label() const {
  switch (alg) {
    case Algorithm::kIcfPie: return selection.label;
    case Algorithm::kIcf: return "identity";
    case Algorithm::kCkf: return "-";
  }
  return "-";
}

std::vector<AlgorithmSpec> default_algorithms(const ScenarioConfig& cfg) {
  std::vector<AlgorithmSpec> algs;
  for (const SelectionCase& s : cfg.selections) {
    algs.push_back({Algorithm::kIcfPie, s});
  }
  algs.push_back({Algorithm::kIcf, SelectionCase::identity(cfg.state_dim())});
  algs.push_back({Algorithm::kCkf, {}});
  return algs;
}

const SeriesMetrics* RunMetrics::find(Algorithm alg,
                                      const std::string& case_label) const {
  for (const SeriesMetrics& s : series) {
    if (s.spec.alg == alg &&
        (case_label.empty() || s.spec.case_label() == case_label)) {
      return &s;
    }
  }
  return nullptr;
}

const SeriesSummary* MonteCarloResult::find(Algorithm alg,
                                            const std::string& case_label) const {
  for (const SeriesSummary& s : series) {
    if (s.spec.alg == alg &&
        (case_label.empty() || s.spec.case_label() == case_label)) {
      return &s;
    }
  }
  return nullptr;
}

std::optional<double> settling_time(const std::vector<double>& series, double dt,
                                    double band, double window) {
  if (series.empty()) return std::nullopt;
  const auto n = static_cast<long>(series.size());
  const long w = std::clamp(static_cast<long>(std::llround(window / dt)), 1L, n);
  double final_value = 0.0;
  for (long k = n - w; k < n; ++k) final_value += series[static_cast<std::size_t>(k)];
  final_value /= static_cast<double>(w);

  const double tol = band * std::abs(final_value);
  long last_outside = -1;
  for (long k = 0; k < n; ++k) {
    if (std::abs(series[static_cast<std::size_t>(k)] - final_value) > tol) {
      last_outside = k;
    }
  }
  if (last_outside >= n - w) return std::nullopt;
  // Sample k sits at time (k + 1) dt; the series is in band from the sample
  // after the last excursion onwards.
  return static_cast<double>(last_outside + 2) * dt;
}

RunMetrics run_once(const Scenario& scenario, int consensus_steps,
                    const std::vector<AlgorithmSpec>& algorithms, int run_index,
                    std::vector<BandwidthLedger>* ledgers) {
  if (consensus_steps < 1) throw ConfigError("consensus steps L must be >= 1");
  RunMetrics out;
  out.run = run_index;
  out.seed = scenario.seed;
  out.consensus_steps = consensus_steps;
  out.time.reserve(scenario.truth.size());
  for (std::size_t k = 0; k < scenario.truth.size(); ++k) {
    out.time.push_back(static_cast<double>(k + 1) * scenario.cfg.dt);
  }

  for (const AlgorithmSpec& spec : algorithms) {
    if (spec.alg == Algorithm::kCkf) {
      out.series.push_back(run_centralized(scenario, spec));
      if (ledgers) ledgers->emplace_back(run_index, true);
      continue;
    }
    BandwidthLedger ledger(run_index, ledgers != nullptr);
    out.series.push_back(run_distributed(scenario, consensus_steps, spec, ledger));
    if (ledgers) ledgers->push_back(std::move(ledger));
  }
  return out;
}

MonteCarloResult average_runs(std::vector<RunMetrics> runs,
                              std::vector<RunFailure> failures, double dt) {
  MonteCarloResult out;
  out.failures = std::move(failures);
  if (runs.empty()) {
    out.runs = std::move(runs);
    return out;
  }
  const RunMetrics& first = runs.front();
  out.consensus_steps = first.consensus_steps;
  out.time = first.time;
  const std::size_t steps = first.time.size();
  const auto count = static_cast<double>(runs.size());

  for (std::size_t s = 0; s < first.series.size(); ++s) {
    SeriesSummary sum;
    sum.spec = first.series[s].spec;
    sum.mean.assign(steps, 0.0);
    sum.min.assign(steps, std::numeric_limits<double>::infinity());
    sum.max.assign(steps, -std::numeric_limits<double>::infinity());
    sum.stddev.assign(steps, 0.0);
    std::vector<double> sq(steps, 0.0);
    for (const RunMetrics& run : runs) {
      const SeriesMetrics& m = run.series[s];
      for (std::size_t k = 0; k < steps; ++k) {
        const double v = m.avg_error_norm[k];
        sum.mean[k] += v;
        sq[k] += v * v;
        sum.min[k] = std::min(sum.min[k], v);
        sum.max[k] = std::max(sum.max[k], v);
      }
      sum.final_error += m.final_error;
    }
    for (std::size_t k = 0; k < steps; ++k) {
      sum.mean[k] /= count;
      const double var = sq[k] / count - sum.mean[k] * sum.mean[k];
      sum.stddev[k] = std::sqrt(std::max(0.0, var));
    }
    sum.final_error /= count;
    sum.settling = settling_time(sum.mean, dt);
    sum.total_scalars = first.series[s].total_scalars;
    out.series.push_back(std::move(sum));
  }
  out.runs = std::move(runs);
  return out;
}

namespace {

struct RunSlot {
  std::vector<std::optional<RunMetrics>> per_l;
  std::vector<std::string> errors;  // per L, empty when the run succeeded
  std::uint64_t seed = 0;
};

std::vector<MonteCarloResult> monte_carlo(const ScenarioConfig& cfg,
                                          const std::vector<int>& l_values,
                                          const MonteCarloOptions& opts) {
  cfg.validate();
  if (l_values.empty()) throw ConfigError("at least one L value required");
  for (int l : l_values) {
    if (l < 1) throw ConfigError("consensus steps L must be >= 1");
  }
  const std::vector<AlgorithmSpec> algorithms = default_algorithms(cfg);
  const int runs = cfg.mc_runs;
  std::vector<RunSlot> slots(static_cast<std::size_t>(runs));

  auto do_run = [&](int k) {
    RunSlot& slot = slots[static_cast<std::size_t>(k)];
    slot.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    slot.per_l.resize(l_values.size());
    slot.errors.resize(l_values.size());
    std::optional<Scenario> sc;
    try {
      sc.emplace(build_scenario(cfg, slot.seed));
    } catch (const std::exception& e) {
      for (std::string& err : slot.errors) err = e.what();
      return;
    }
    for (std::size_t li = 0; li < l_values.size(); ++li) {
      try {
        slot.per_l[li] = run_once(*sc, l_values[li], algorithms, k);
      } catch (const std::exception& e) {
        slot.errors[li] = e.what();
      }
    }
  };

  int threads = opts.threads > 0
                    ? opts.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, runs);
  if (threads <= 1) {
    for (int k = 0; k < runs; ++k) do_run(k);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (int k = next++; k < runs; k = next++) do_run(k);
      });
    }
  }

  std::vector<MonteCarloResult> results;
  for (std::size_t li = 0; li < l_values.size(); ++li) {
    std::vector<RunMetrics> accepted;
    std::vector<RunFailure> failures;
    for (int k = 0; k < runs; ++k) {
      RunSlot& slot = slots[static_cast<std::size_t>(k)];
      if (slot.per_l[li]) {
        accepted.push_back(std::move(*slot.per_l[li]));
      } else {
        failures.push_back({k, slot.seed, slot.errors[li]});
      }
    }
    if (static_cast<double>(failures.size()) >
        opts.max_failure_fraction * static_cast<double>(runs)) {
      throw HarnessError(std::to_string(failures.size()) + " of " +
                         std::to_string(runs) + " runs failed at L = " +
                         std::to_string(l_values[li]) + "; first: " +
                         failures.front().message);
    }
    MonteCarloResult r = average_runs(std::move(accepted), std::move(failures),
                                      cfg.dt);
    r.consensus_steps = l_values[li];
    if (!opts.keep_runs) r.runs.clear();
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace

MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg, int consensus_steps,
                                 const MonteCarloOptions& opts) {
  return std::move(monte_carlo(cfg, {consensus_steps}, opts).front());
}

SweepResult sweep_consensus_steps(const ScenarioConfig& cfg,
                                  const std::vector<int>& l_values,
                                  const MonteCarloOptions& opts) {
  SweepResult out;
  out.per_l = monte_carlo(cfg, l_values, opts);
  for (const MonteCarloResult& r : out.per_l) {
    for (const SeriesSummary& s : r.series) {
      out.rows.push_back({r.consensus_steps, s.spec.label(), s.spec.case_label(),
                          s.final_error, s.total_scalars});
    }
  }
  return out;
}

std::string code_version() {
#ifdef ICFPIE_VERSION
  return ICFPIE_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace icfpie
