#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "icfpie/harness.hpp"

namespace icfpie {

/// Reads a flat `key = value` config over the built-in defaults. Values are
/// numbers, words, or JSON-style lists; `#` starts a comment. Subsets in
/// `selection` are 1-based, e.g. `selection = [[1,3],[2,4]]`.
/// Throws ConfigError with the offending line.
ScenarioConfig parse_config(std::istream& in,
                            ScenarioConfig base = ScenarioConfig{});
ScenarioConfig load_config(const std::filesystem::path& path,
                           ScenarioConfig base = ScenarioConfig{});

/// Serializes every key so parse_config(write_config(c)) == c.
std::string write_config(const ScenarioConfig& cfg);

/// "1", "2", "identity", a comma list of those, or a nested subset list.
std::vector<SelectionCase> parse_selection(const std::string& text);

/// "1..20", "2,4,8", "[2,4,8]" or a single integer.
std::vector<int> parse_int_list(const std::string& text);

}  // namespace icfpie
