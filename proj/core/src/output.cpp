#include <cstdio>
#include <fstream>
#include <ostream>

#include "icfpie/config.hpp"
#include "icfpie/harness.hpp"

namespace icfpie {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_metadata(std::ostream& out, const ScenarioConfig& cfg,
                    const std::vector<const MonteCarloResult*>& results) {
  out << "# icfpie " << code_version() << " run metadata\n"
      << "# Pass this file back with --config to reproduce the outputs.\n";
  // Per-run seeds and failures for the record; all derive from `seed`.
  if (!results.empty()) {
    out << "# run seeds:";
    for (int k = 0; k < cfg.mc_runs; ++k) {
      out << ' ' << derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    }
    out << '\n';
    for (const MonteCarloResult* res : results) {
      for (const RunFailure& f : res->failures) {
        out << "# failed run " << f.run << " at L=" << res->consensus_steps << ": "
            << f.message << '\n';
      }
    }
    for (const MonteCarloResult* res : results) {
      for (const SeriesSummary& s : res->series) {
        out << "# settling " << s.spec.label() << " case " << s.spec.case_label()
            << " L=" << res->consensus_steps << ": "
            << (s.settling ? num(*s.settling) + " s" : std::string("unsettled"))
            << '\n';
      }
    }
  }
  out << write_config(cfg);
}

}  // namespace

void write_timeseries_csv(std::ostream& out, const MonteCarloResult& result,
                          bool header) {
  if (header) out << "t,alg,case,L,avg_error_norm\n";
  for (const SeriesSummary& s : result.series) {
    const std::string alg = s.spec.label();
    const std::string case_label = s.spec.case_label();
    for (std::size_t k = 0; k < s.mean.size(); ++k) {
      out << num(result.time[k]) << ',' << alg << ',' << case_label << ','
          << result.consensus_steps << ',' << num(s.mean[k]) << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "L,alg,case,final_error,total_scalars\n";
  for (const SweepRow& row : sweep.rows) {
    out << row.consensus_steps << ',' << row.alg << ',' << row.case_label << ','
        << num(row.final_error) << ',' << row.total_scalars << '\n';
  }
}

OutputPaths emit_outputs(const MonteCarloResult& result, const ScenarioConfig& cfg,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  OutputPaths paths{dir / "timeseries.csv", {}, dir / "run.cfg"};
  {
    std::ofstream out = open_output(paths.timeseries);
    write_timeseries_csv(out, result);
    check_written(out, paths.timeseries);
  }
  {
    std::ofstream out = open_output(paths.metadata);
    ScenarioConfig effective = cfg;
    effective.consensus_steps = result.consensus_steps;
    write_metadata(out, effective, {&result});
    check_written(out, paths.metadata);
  }
  return paths;
}

OutputPaths emit_outputs(const SweepResult& sweep, const ScenarioConfig& cfg,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  OutputPaths paths{dir / "timeseries.csv", dir / "sweep.csv", dir / "run.cfg"};
  {
    std::ofstream out = open_output(paths.sweep);
    write_sweep_csv(out, sweep);
    check_written(out, paths.sweep);
  }
  {
    std::ofstream out = open_output(paths.timeseries);
    bool header = true;
    for (const MonteCarloResult& r : sweep.per_l) {
      write_timeseries_csv(out, r, header);
      header = false;
    }
    check_written(out, paths.timeseries);
  }
  {
    std::ofstream out = open_output(paths.metadata);
    std::vector<const MonteCarloResult*> results;
    for (const MonteCarloResult& r : sweep.per_l) results.push_back(&r);
    write_metadata(out, cfg, results);
    check_written(out, paths.metadata);
  }
  return paths;
}

}  // namespace icfpie
