#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgerec/letor.hpp"
#include "edgerec/sim.hpp"

namespace edgerec {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AgentKind { Coagent, CoordinateDescent };

AgentKind agent_from_name(std::string_view name);  // "coagent" | "cd"
std::string_view agent_name(AgentKind agent);

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::Mq2008;
  SimMode mode = SimMode::Bandit;
  std::vector<std::string> dataset_paths;
  AgentKind agent = AgentKind::Coagent;
  std::vector<double> unreliability_levels = {0.0, 0.25, 0.5, 0.75};
  double alpha = 0.01;
  double gamma = 1.0;
  std::uint64_t episodes = 200000;
  std::uint64_t trials = 30;
  std::uint64_t base_seed = 1;
  std::size_t smoothing_window = 10000;
  std::string output_dir = "out";
  unsigned threads = 1;
  bool fixed_query = false;       // fix the query per episode in RL mode
  std::size_t unit_count = kDefaultUnitCount;
  double init_scale = 0.01;
  std::string pool_cache;         // optional normalized-pool cache path

  void validate() const;  // throws ConfigError
};

/// Parses a "key = value" config file ('#' comments, blank lines allowed).
ExperimentConfig load_config_file(const std::string& path);

/// Applies one key/value pair; throws ConfigError on unknown keys or bad values.
void apply_config_entry(ExperimentConfig& config, std::string_view key,
                        std::string_view value);

/// Running average over the trailing `window` points; the first window-1
/// points all take the mean of the first window returns (or of everything,
/// when fewer exist).
std::vector<double> smooth_curve(std::span<const double> returns, std::size_t window);

struct RunResult {
  std::vector<double> levels;
  /// raw[level][trial][episode] — undiscounted episode returns.
  std::vector<std::vector<std::vector<double>>> raw;
  /// Across-trial mean and sample standard deviation of the smoothed curves.
  std::vector<std::vector<double>> mean_smoothed;  // [level][episode]
  std::vector<std::vector<double>> std_smoothed;
  std::string raw_csv_path;
  std::string aggregate_csv_path;
};

/// Returns of a single seeded trial at one unreliability level.
std::vector<double> run_single_trial(const QueryPool& pool,
                                     const ExperimentConfig& config,
                                     double unreliability, std::uint64_t seed);

/// The full protocol: validates inputs up front, builds (or loads) the pool,
/// runs trials x levels with per-cell seeds (parallel across threads, output
/// independent of scheduling), and writes raw.csv plus aggregate.csv under
/// output_dir. Byte-identical across reruns of the same config.
RunResult run_experiment(const ExperimentConfig& config);

/// Shortest round-trip decimal formatting, used for all CSV numbers.
std::string format_double(double v);

}  // namespace edgerec
