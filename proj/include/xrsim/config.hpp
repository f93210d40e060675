#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "xrsim/engine.hpp"

namespace xrsim {

/// Parses a scenario from YAML text. `overrides` are "dotted.key=value"
/// strings applied to the document before it is read, so they obey the same
/// schema. Unknown keys and malformed values throw ConfigError naming the key.
/// The result is not validated; call validate().
Scenario parse_scenario(std::string_view yaml_text, std::span<const std::string> overrides = {});

/// parse_scenario on a file. A missing or unreadable file throws IoError.
Scenario load_scenario(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Canonical YAML rendering. parse_scenario(to_yaml(s)) reproduces s.
std::string to_yaml(const Scenario& scenario);

/// Parses "1..5", "1,2,4" or "1..9:2" into an ascending list.
std::vector<int> parse_int_list(std::string_view text, std::string_view field);
std::vector<double> parse_double_list(std::string_view text, std::string_view field);

}  // namespace xrsim
