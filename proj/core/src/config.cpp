#include "icfpie/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "icfpie/errors.hpp"

namespace icfpie {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("expected a number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("expected an integer, got '" + text + "'");
  return v;
}

std::vector<double> parse_doubles(const std::string& text,
                                  std::size_t expected = 0) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("expected a list of numbers, got '" + text + "'");
  }
  if (!j.is_array()) throw ConfigError("expected a list, got '" + text + "'");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError("list entries must be numbers: " + text);
    out.push_back(v.get<double>());
  }
  if (expected && out.size() != expected) {
    throw ConfigError("expected " + std::to_string(expected) + " numbers, got '" +
                      text + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out + "]";
}

std::string format_subsets(const std::vector<std::vector<int>>& subsets) {
  std::string out = "[";
  for (std::size_t z = 0; z < subsets.size(); ++z) {
    if (z) out += ",";
    out += "[";
    for (std::size_t r = 0; r < subsets[z].size(); ++r) {
      if (r) out += ",";
      out += std::to_string(subsets[z][r]);
    }
    out += "]";
  }
  return out + "]";
}

SelectionCase parse_one_selection(const std::string& raw) {
  const std::string text = lower(trim(raw));
  if (text == "1" || text == "case1") return SelectionCase::case1();
  if (text == "2" || text == "case2") return SelectionCase::case2();
  if (text == "identity" || text == "full") return SelectionCase::identity();
  if (!text.empty() && text.front() == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("cannot parse selection subsets '" + raw + "'");
    }
    std::vector<std::vector<int>> subsets;
    if (!j.is_array()) throw ConfigError("selection must be a list of lists");
    for (const auto& subset : j) {
      if (!subset.is_array()) throw ConfigError("selection must be a list of lists");
      std::vector<int> s;
      for (const auto& r : subset) {
        if (!r.is_number_integer()) {
          throw ConfigError("selection indices must be integers");
        }
        s.push_back(r.get<int>());
      }
      subsets.push_back(std::move(s));
    }
    return SelectionCase::custom(std::move(subsets));
  }
  throw ConfigError("unknown selection case '" + raw + "' (use 1, 2, identity or [[..],..])");
}

}  // namespace

std::vector<SelectionCase> parse_selection(const std::string& text) {
  std::vector<std::string> parts;
  const std::string t = trim(text);
  const char sep = t.find('[') != std::string::npos ? ';' : ',';
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, sep)) {
    if (!trim(part).empty()) parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("selection is empty");
  std::vector<SelectionCase> out;
  for (const std::string& p : parts) out.push_back(parse_one_selection(p));
  return out;
}

std::vector<int> parse_int_list(const std::string& raw) {
  std::string text = trim(raw);
  if (text.empty()) return {};
  if (text.front() == '[') {
    if (text.back() != ']') throw ConfigError("unterminated list '" + raw + "'");
    text = text.substr(1, text.size() - 2);
  }
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const long long lo = parse_integer(trim(text.substr(0, dots)));
    const long long hi = parse_integer(trim(text.substr(dots + 2)));
    if (hi < lo) throw ConfigError("empty range '" + raw + "'");
    for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
    return out;
  }
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (trim(part).empty()) continue;
    out.push_back(static_cast<int>(parse_integer(trim(part))));
  }
  return out;
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig cfg) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));

    try {
      if (key == "n_nodes") {
        cfg.n_nodes = static_cast<int>(parse_integer(value));
      } else if (key == "comm_range") {
        cfg.comm_range = parse_double(value);
      } else if (key == "sensing_range") {
        cfg.sensing_range = parse_double(value);
      } else if (key == "region") {
        const auto r = parse_doubles(value, 4);
        cfg.region = {r[0], r[1], r[2], r[3]};
      } else if (key == "max_placement_retries") {
        cfg.max_placement_retries = static_cast<int>(parse_integer(value));
      } else if (key == "dt") {
        cfg.dt = parse_double(value);
      } else if (key == "horizon") {
        cfg.horizon = parse_double(value);
      } else if (key == "process_cov") {
        cfg.process_cov_diag = parse_doubles(value);
      } else if (key == "meas_cov") {
        cfg.meas_cov_diag = parse_doubles(value);
      } else if (key == "target_position") {
        const auto p = parse_doubles(value, 2);
        cfg.target_position = {p[0], p[1]};
      } else if (key == "speed_range") {
        const auto v = parse_doubles(value, 2);
        cfg.speed_min = v[0];
        cfg.speed_max = v[1];
      } else if (key == "heading_range") {
        const auto v = parse_doubles(value, 2);
        cfg.heading_min = v[0];
        cfg.heading_max = v[1];
      } else if (key == "speed_variance") {
        cfg.speed_variance = parse_double(value);
      } else if (key == "truth_noise") {
        const std::string v = lower(value);
        if (v == "speed") {
          cfg.truth_noise = TruthNoise::kSpeed;
        } else if (v == "process") {
          cfg.truth_noise = TruthNoise::kProcess;
        } else {
          throw ConfigError("truth_noise must be speed or process");
        }
      } else if (key == "initial_estimate") {
        cfg.initial_estimate = parse_doubles(value);
      } else if (key == "initial_information") {
        cfg.initial_information = parse_double(value);
      } else if (key == "selection") {
        cfg.selections = parse_selection(value);
      } else if (key == "consensus_steps") {
        cfg.consensus_steps = static_cast<int>(parse_integer(value));
      } else if (key == "sweep") {
        cfg.sweep = lower(value) == "none" ? std::vector<int>{} : parse_int_list(value);
      } else if (key == "epsilon") {
        cfg.epsilon = lower(value) == "auto" ? 0.0 : parse_double(value);
      } else if (key == "error_metric") {
        const std::string v = lower(value);
        if (v == "full") {
          cfg.error_metric = ErrorMetric::kFullState;
        } else if (v == "position") {
          cfg.error_metric = ErrorMetric::kPosition;
        } else {
          throw ConfigError("error_metric must be full or position");
        }
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_integer(value));
      } else if (key == "runs") {
        cfg.mc_runs = static_cast<int>(parse_integer(value));
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_config(in, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string write_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "n_nodes = " << cfg.n_nodes << '\n'
      << "comm_range = " << format_double(cfg.comm_range) << '\n'
      << "sensing_range = " << format_double(cfg.sensing_range) << '\n'
      << "region = "
      << format_list({cfg.region.x_min, cfg.region.x_max, cfg.region.y_min,
                      cfg.region.y_max})
      << '\n'
      << "max_placement_retries = " << cfg.max_placement_retries << '\n'
      << "dt = " << format_double(cfg.dt) << '\n'
      << "horizon = " << format_double(cfg.horizon) << '\n'
      << "process_cov = " << format_list(cfg.process_cov_diag) << '\n'
      << "meas_cov = " << format_list(cfg.meas_cov_diag) << '\n'
      << "target_position = "
      << format_list({cfg.target_position.x(), cfg.target_position.y()}) << '\n'
      << "speed_range = " << format_list({cfg.speed_min, cfg.speed_max}) << '\n'
      << "heading_range = " << format_list({cfg.heading_min, cfg.heading_max})
      << '\n'
      << "speed_variance = " << format_double(cfg.speed_variance) << '\n'
      << "truth_noise = "
      << (cfg.truth_noise == TruthNoise::kSpeed ? "speed" : "process") << '\n'
      << "initial_estimate = " << format_list(cfg.initial_estimate) << '\n'
      << "initial_information = " << format_double(cfg.initial_information)
      << '\n';

  out << "selection = ";
  for (std::size_t i = 0; i < cfg.selections.size(); ++i) {
    if (i) out << "; ";
    const SelectionCase& s = cfg.selections[i];
    if (s.label == "custom") {
      out << format_subsets(s.subsets);
    } else {
      out << s.label;
    }
  }
  out << '\n';

  out << "consensus_steps = " << cfg.consensus_steps << '\n';
  out << "sweep = ";
  if (cfg.sweep.empty()) {
    out << "none";
  } else {
    out << '[';
    for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
      if (i) out << ',';
      out << cfg.sweep[i];
    }
    out << ']';
  }
  out << '\n'
      << "epsilon = "
      << (cfg.epsilon > 0.0 ? format_double(cfg.epsilon) : std::string("auto"))
      << '\n'
      << "error_metric = "
      << (cfg.error_metric == ErrorMetric::kFullState ? "full" : "position")
      << '\n'
      << "seed = " << cfg.seed << '\n'
      << "runs = " << cfg.mc_runs << '\n';
  return out.str();
}

}  // namespace icfpie
