#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ulab::config {

// Flat key=value experiment description. [section] headers group keys for
// humans; keys must be unique across the whole file.
struct ExperimentConfig {
  std::string subcommand;
  std::string out_dir = ".";
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::vector<uint64_t> get_int_list(const std::string& key) const;   // comma separated
  std::vector<double> get_double_list(const std::string& key) const;  // comma separated
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

const std::vector<std::string>& known_subcommands();

}  // namespace ulab::config
