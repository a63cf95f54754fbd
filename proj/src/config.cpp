#include "ulab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ulab/errors.hpp"

namespace ulab::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

int64_t ExperimentConfig::get_int(const std::string& key, int64_t fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw invalid_argument("config: key '" + key + "' is not an integer: " + it->second);
  }
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw invalid_argument("config: key '" + key + "' is not a number: " + it->second);
  }
}

std::vector<uint64_t> ExperimentConfig::get_int_list(const std::string& key) const {
  std::vector<uint64_t> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stoull(item));
    } catch (...) {
      throw invalid_argument("config: key '" + key + "' has a non-integer entry: " + item);
    }
  }
  return out;
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw invalid_argument("config: key '" + key + "' has a non-numeric entry: " + item);
    }
  }
  return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw invalid_argument("config line " + std::to_string(lineno) + ": unterminated section");
      continue;  // sections are grouping only
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.params.count(key))
      throw invalid_argument("config line " + std::to_string(lineno) + ": duplicate key " + key);
    cfg.params[key] = value;
  }
  if (cfg.has("subcommand")) cfg.subcommand = cfg.get("subcommand");
  if (cfg.has("out")) cfg.out_dir = cfg.get("out");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

const std::vector<std::string>& known_subcommands() {
  static const std::vector<std::string> cmds = {
      "gowers", "mangoldt-scan", "average", "recur",  "cube",
      "nilweight", "vdc",        "identity", "pattern", "counterexample"};
  return cmds;
}

}  // namespace ulab::config
