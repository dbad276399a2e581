#pragma once

// Flat key-value experiment configuration with [section] headers. Keys read
// through the typed getters are marked consumed; finish() rejects anything
// left over, so misspelled keys fail loudly instead of silently using a
// default.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace deferlab {

class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  int get_int(const std::string& key, int fallback);
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  // Comma-separated lists, e.g. "0.05,0.1,0.2".
  std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback);
  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback);

  // Throws ConfigError naming every key never consumed.
  void finish() const;

 private:
  std::string take(const std::string& key);
  std::map<std::string, std::string> values_;  // "section.key" or bare "key"
  std::set<std::string> consumed_;
};

// Common fields shared by every experiment.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  int trials = 1;
  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency
  bool emit_gnuplot = false;
};

// Reads the global section (experiment, seed, trials, output_dir, threads,
// emit_gnuplot); default_trials supplies the per-experiment trial count.
ExperimentConfig read_experiment_config(Config& cfg, int default_trials);

}  // namespace deferlab
