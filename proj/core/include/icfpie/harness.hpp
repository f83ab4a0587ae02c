#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icfpie/dicf.hpp"
#include "icfpie/models.hpp"
#include "icfpie/network.hpp"
#include "icfpie/selection.hpp"

namespace icfpie {

/// A named entry-selection schedule. Subsets are 1-based, as in config files.
struct SelectionCase {
  std::string label;
  std::vector<std::vector<int>> subsets;

  static SelectionCase case1();
  static SelectionCase case2();
  static SelectionCase identity(int n = 4);
  static SelectionCase custom(std::vector<std::vector<int>> subsets);

  EntrySelectionSchedule schedule(int n) const;
  bool operator==(const SelectionCase&) const = default;
};

enum class TruthNoise { kSpeed, kProcess };
enum class ErrorMetric { kFullState, kPosition };

/// Every scenario parameter. Defaults reproduce the reference tracking study:
/// 10 nodes, 300 m ranges, dt 0.1 s over 30 s, Q = diag(10,10,1,1),
/// R = diag(25,25), target starting at (400, 0).
struct ScenarioConfig {
  int n_nodes = 10;
  double comm_range = 300.0;
  double sensing_range = 300.0;
  Region region{};
  int max_placement_retries = 1000;

  double dt = 0.1;
  double horizon = 30.0;
  std::vector<double> process_cov_diag{10.0, 10.0, 1.0, 1.0};
  std::vector<double> meas_cov_diag{25.0, 25.0};

  Eigen::Vector2d target_position{400.0, 0.0};
  double speed_min = 10.0;
  double speed_max = 15.0;
  double heading_min = 0.5 * 3.14159265358979323846;
  double heading_max = 0.75 * 3.14159265358979323846;
  double speed_variance = 0.25;
  TruthNoise truth_noise = TruthNoise::kSpeed;

  // Initial estimate x_{1|0} and information Omega_{1|0} = omega_init * I.
  std::vector<double> initial_estimate{0.0, 0.0, 0.0, 0.0};
  double initial_information = 0.0;

  std::vector<SelectionCase> selections{SelectionCase::case1(),
                                        SelectionCase::case2()};
  int consensus_steps = 12;
  std::vector<int> sweep;  // empty: no sweep
  // 0 selects 1 / (max_degree + 1).
  double epsilon = 0.0;
  ErrorMetric error_metric = ErrorMetric::kFullState;

  std::uint64_t seed = 1;
  int mc_runs = 100;

  int state_dim() const { return static_cast<int>(process_cov_diag.size()); }
  int steps() const;
  TruthModel truth_model() const;
  Matrix process_cov() const;
  Matrix meas_cov() const;
  void validate() const;
};

/// Seed for Monte-Carlo run k: splitmix64(master + k).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run);

/// Everything a run needs, pre-drawn so every algorithm sees identical truth
/// and measurements.
struct Scenario {
  ScenarioConfig cfg;
  std::uint64_t seed = 0;
  SensorNetwork network;
  TruthModel truth_model;
  SystemModel system;
  Matrix W;
  std::vector<MeasurementModel> meas_models;
  // truth[k] and measurements[k] belong to time (k + 1) * dt.
  std::vector<StateVector> truth;
  std::vector<NodeMeasurements> measurements;
  int degenerate_heading_steps = 0;
  int unsensed_node_steps = 0;

  InformationState initial_prior() const;
  std::vector<NodeFilter> initial_filters() const;
  double eps() const;
};

Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

/// Builds the scenario on a fixed topology instead of random placement.
Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                        SensorNetwork network);

enum class Algorithm { kIcfPie, kIcf, kCkf };

std::string to_string(Algorithm alg);

struct AlgorithmSpec {
  Algorithm alg = Algorithm::kCkf;
  SelectionCase selection;  // used by kIcfPie only

  std::string label() const;       // "icf-pie", "icf", "ckf"
  std::string case_label() const;  // "1", "2", "identity", "custom", "-"
};

/// ICF-PIE for each configured selection, then ICF and CKF.
std::vector<AlgorithmSpec> default_algorithms(const ScenarioConfig& cfg);

/// Metrics for one algorithm over one run.
struct SeriesMetrics {
  AlgorithmSpec spec;
  // Average over nodes of the error norm, one entry per step.
  std::vector<double> avg_error_norm;
  // Same, for the prior (one-step-ahead) estimate.
  std::vector<double> avg_prior_error_norm;
  double final_error = 0.0;
  // Per node, mean squared error norm over the last 10 s.
  std::vector<double> node_mse_tail;
  // Extreme eigenvalues of every node's Omega_{t|t} after the 2 s transient.
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int regularizations = 0;
  int regularizations_after_transient = 0;
  std::int64_t total_scalars = 0;
  bool finite = true;
};

struct RunMetrics {
  int run = 0;
  std::uint64_t seed = 0;
  int consensus_steps = 0;
  std::vector<double> time;
  std::vector<SeriesMetrics> series;

  const SeriesMetrics* find(Algorithm alg,
                            const std::string& case_label = "") const;
};

/// Settling time of a series: the earliest time after which the value stays
/// within band * (mean over the last `window` seconds). nullopt when the band
/// is left during the final window itself.
std::optional<double> settling_time(const std::vector<double>& series,
                                    double dt, double band = 0.05,
                                    double window = 1.0);

inline constexpr double kTransientSeconds = 2.0;
inline constexpr double kTailSeconds = 10.0;

/// Runs every algorithm over the scenario's pre-drawn truth and measurements.
/// Throws NumericalError on a filter failure.
RunMetrics run_once(const Scenario& scenario, int consensus_steps,
                    const std::vector<AlgorithmSpec>& algorithms,
                    int run_index = 0,
                    std::vector<BandwidthLedger>* ledgers = nullptr);

struct RunFailure {
  int run;
  std::uint64_t seed;
  std::string message;
};

/// Monte-Carlo averages for one algorithm at one L.
struct SeriesSummary {
  AlgorithmSpec spec;
  std::vector<double> mean;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> stddev;
  double final_error = 0.0;
  std::optional<double> settling;
  std::int64_t total_scalars = 0;
};

struct MonteCarloResult {
  int consensus_steps = 0;
  std::vector<double> time;
  std::vector<SeriesSummary> series;
  std::vector<RunMetrics> runs;  // accepted runs, in run order
  std::vector<RunFailure> failures;

  const SeriesSummary* find(Algorithm alg,
                            const std::string& case_label = "") const;
};

struct MonteCarloOptions {
  int threads = 0;  // 0: hardware concurrency
  // Harness error when more than this fraction of runs fail.
  double max_failure_fraction = 0.05;
  bool keep_runs = true;
};

/// Thrown when too many Monte-Carlo runs fail.
class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg,
                                 int consensus_steps,
                                 const MonteCarloOptions& opts = {});

/// Averages precomputed runs. Exposed for tests.
MonteCarloResult average_runs(std::vector<RunMetrics> runs,
                              std::vector<RunFailure> failures,
                              double dt);

struct SweepRow {
  int consensus_steps;
  std::string alg;
  std::string case_label;
  double final_error;
  std::int64_t total_scalars;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<MonteCarloResult> per_l;
};

/// One Monte Carlo per L, reusing each run's scenario across all L.
SweepResult sweep_consensus_steps(const ScenarioConfig& cfg,
                                  const std::vector<int>& l_values,
                                  const MonteCarloOptions& opts = {});

// Output files.

/// Columns t,alg,case,L,avg_error_norm.
void write_timeseries_csv(std::ostream& out, const MonteCarloResult& result,
                          bool header = true);
/// Columns L,alg,case,final_error,total_scalars.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

struct OutputPaths {
  std::filesystem::path timeseries;
  std::filesystem::path sweep;
  std::filesystem::path metadata;
};

/// Writes timeseries.csv and run.cfg (a config file that reproduces the run)
/// under dir. Throws std::runtime_error naming the path on I/O failure.
OutputPaths emit_outputs(const MonteCarloResult& result,
                         const ScenarioConfig& cfg,
                         const std::filesystem::path& dir);
/// Writes sweep.csv, timeseries.csv (all L) and run.cfg under dir.
OutputPaths emit_outputs(const SweepResult& sweep, const ScenarioConfig& cfg,
                         const std::filesystem::path& dir);

std::string code_version();

}  // namespace icfpie
