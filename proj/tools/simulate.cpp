// Monte-Carlo driver for the distributed tracking study.
//
//   simulate [--config FILE] [--case 1|2|identity] [--consensus-steps L]
//            [--sweep 1..20] [--runs N] [--seed S] [--out DIR]
//
// Exit codes: 0 success, 2 config error, 3 too many numerical failures.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "icfpie/config.hpp"
#include "icfpie/errors.hpp"
#include "icfpie/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void print_summary(const icfpie::MonteCarloResult& r) {
  for (const icfpie::SeriesSummary& s : r.series) {
    std::printf("L=%-3d %-8s case %-8s final %10.4f  settling %s  scalars %lld\n",
                r.consensus_steps, s.spec.label().c_str(),
                s.spec.case_label().c_str(), s.final_error,
                s.settling ? (std::to_string(*s.settling) + " s").c_str()
                           : "unsettled",
                static_cast<long long>(s.total_scalars));
  }
  if (!r.failures.empty()) {
    std::printf("L=%d: %zu failed runs excluded\n", r.consensus_steps,
                r.failures.size());
  }
}

void write_ledgers(const icfpie::ScenarioConfig& cfg,
                   const std::filesystem::path& dir) {
  const icfpie::Scenario sc =
      icfpie::build_scenario(cfg, icfpie::derive_seed(cfg.seed, 0));
  const auto algorithms = icfpie::default_algorithms(cfg);
  std::vector<icfpie::BandwidthLedger> ledgers;
  icfpie::run_once(sc, cfg.consensus_steps, algorithms, 0, &ledgers);
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    if (algorithms[a].alg == icfpie::Algorithm::kCkf) continue;
    const auto path = dir / ("ledger_" + algorithms[a].label() + "_" +
                             algorithms[a].case_label() + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    ledgers[a].write_csv(out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed information-weighted consensus tracking simulator"};

  std::string config_path;
  std::string case_text;
  int consensus_steps = 0;
  std::string sweep_text;
  int runs = 0;
  long long seed = -1;
  std::string out_dir = "out";
  int threads = 0;
  bool ledger = false;

  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--case", case_text,
                 "Selection case: 1, 2, identity, or a comma list (default 1,2)");
  app.add_option("--consensus-steps,-L", consensus_steps,
                 "Consensus steps per time step")
      ->check(CLI::PositiveNumber);
  app.add_option("--sweep", sweep_text, "Sweep L over a range, e.g. 1..20 or 2,4,8");
  app.add_option("--runs", runs, "Monte-Carlo runs")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Master seed")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads (0: all cores)");
  app.add_flag("--ledger", ledger,
               "Also write per-broadcast bandwidth ledgers for run 0");

  CLI11_PARSE(app, argc, argv);

  icfpie::ScenarioConfig cfg;
  try {
    if (!config_path.empty()) cfg = icfpie::load_config(config_path);
    if (!case_text.empty()) cfg.selections = icfpie::parse_selection(case_text);
    if (consensus_steps > 0) cfg.consensus_steps = consensus_steps;
    if (!sweep_text.empty()) cfg.sweep = icfpie::parse_int_list(sweep_text);
    if (runs > 0) cfg.mc_runs = runs;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.validate();
  } catch (const icfpie::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  icfpie::MonteCarloOptions opts;
  opts.threads = threads;
  opts.keep_runs = false;

  try {
    icfpie::OutputPaths paths;
    if (!cfg.sweep.empty()) {
      const icfpie::SweepResult sweep =
          icfpie::sweep_consensus_steps(cfg, cfg.sweep, opts);
      for (const auto& r : sweep.per_l) print_summary(r);
      paths = icfpie::emit_outputs(sweep, cfg, out_dir);
      std::cout << "wrote " << paths.sweep.string() << '\n';
    } else {
      const icfpie::MonteCarloResult result =
          icfpie::run_monte_carlo(cfg, cfg.consensus_steps, opts);
      print_summary(result);
      paths = icfpie::emit_outputs(result, cfg, out_dir);
    }
    if (ledger) write_ledgers(cfg, out_dir);
    std::cout << "wrote " << paths.timeseries.string() << '\n'
              << "wrote " << paths.metadata.string() << '\n';
  } catch (const icfpie::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const icfpie::HarnessError& e) {
    std::cerr << "numerical failures: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
