#include "edgerec/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "edgerec/baseline.hpp"

namespace edgerec {

namespace fs = std::filesystem;

AgentKind agent_from_name(std::string_view name) {
  if (name == "coagent") return AgentKind::Coagent;
  if (name == "cd") return AgentKind::CoordinateDescent;
  throw ConfigError("unknown agent '" + std::string(name) + "' (expected coagent or cd)");
}

std::string_view agent_name(AgentKind agent) {
  return agent == AgentKind::Coagent ? "coagent" : "cd";
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (smoothing_window < 1) throw ConfigError("smoothing_window must be >= 1");
  if (unreliability_levels.empty()) throw ConfigError("at least one unreliability level required");
  for (const double p : unreliability_levels)
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError("unreliability level " + format_double(p) + " outside [0, 1]");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (unit_count < 1) throw ConfigError("units must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (dataset_paths.empty() && pool_cache.empty())
    throw ConfigError("dataset_path (or pool_cache) required");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const std::size_t pos = s.find(sep);
    if (pos == std::string_view::npos) {
      if (!trim(s).empty()) parts.push_back(trim(s));
      return parts;
    }
    if (!trim(s.substr(0, pos)).empty()) parts.push_back(trim(s.substr(0, pos)));
    s.remove_prefix(pos + 1);
  }
}

double parse_config_double(std::string_view value, std::string_view key) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("bad numeric value '" + std::string(value) + "' for " + std::string(key));
  return v;
}

std::uint64_t parse_config_u64(std::string_view value, std::string_view key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("bad integer value '" + std::string(value) + "' for " + std::string(key));
  return v;
}

bool parse_config_bool(std::string_view value, std::string_view key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean value '" + std::string(value) + "' for " + std::string(key));
}

}  // namespace

void apply_config_entry(ExperimentConfig& config, std::string_view key,
                        std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "dataset") {
    try {
      config.dataset = dataset_from_name(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "mode") {
    if (value == "bandit") config.mode = SimMode::Bandit;
    else if (value == "rl") config.mode = SimMode::Rl;
    else throw ConfigError("unknown mode '" + std::string(value) + "' (expected bandit or rl)");
  } else if (key == "dataset_path") {
    config.dataset_paths.clear();
    for (const std::string_view part : split(value, ',')) config.dataset_paths.emplace_back(part);
  } else if (key == "agent") {
    config.agent = agent_from_name(value);
  } else if (key == "levels") {
    config.unreliability_levels.clear();
    for (const std::string_view part : split(value, ','))
      config.unreliability_levels.push_back(parse_config_double(part, key));
    if (config.unreliability_levels.empty()) throw ConfigError("levels list is empty");
  } else if (key == "alpha") {
    config.alpha = parse_config_double(value, key);
  } else if (key == "gamma") {
    config.gamma = parse_config_double(value, key);
  } else if (key == "episodes") {
    config.episodes = parse_config_u64(value, key);
  } else if (key == "trials") {
    config.trials = parse_config_u64(value, key);
  } else if (key == "seed") {
    config.base_seed = parse_config_u64(value, key);
  } else if (key == "smoothing_window") {
    config.smoothing_window = static_cast<std::size_t>(parse_config_u64(value, key));
  } else if (key == "output_dir") {
    config.output_dir = std::string(value);
  } else if (key == "threads") {
    config.threads = static_cast<unsigned>(parse_config_u64(value, key));
  } else if (key == "fixed_query") {
    config.fixed_query = parse_config_bool(value, key);
  } else if (key == "units") {
    config.unit_count = static_cast<std::size_t>(parse_config_u64(value, key));
  } else if (key == "init_scale") {
    config.init_scale = parse_config_double(value, key);
  } else if (key == "pool_cache") {
    config.pool_cache = std::string(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const std::size_t eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      apply_config_entry(config, view.substr(0, eq), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

std::vector<double> smooth_curve(std::span<const double> returns, std::size_t window) {
  if (window < 1) throw std::invalid_argument("smooth_curve: window must be >= 1");
  if (returns.empty()) throw std::invalid_argument("smooth_curve: empty input");

  std::vector<double> prefix(returns.size() + 1, 0.0);
  for (std::size_t i = 0; i < returns.size(); ++i) prefix[i + 1] = prefix[i] + returns[i];

  const std::size_t head = std::min(window, returns.size());
  const double head_mean = prefix[head] / static_cast<double>(head);

  std::vector<double> out(returns.size());
  for (std::size_t k = 0; k < returns.size(); ++k)
    out[k] = k + 1 >= window
                 ? (prefix[k + 1] - prefix[k + 1 - window]) / static_cast<double>(window)
                 : head_mean;
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> run_single_trial(const QueryPool& pool,
                                     const ExperimentConfig& config,
                                     double unreliability, std::uint64_t seed) {
  SimVariant variant = SimVariant::make(config.dataset, config.mode);
  variant.resample_query_each_step = !config.fixed_query;
  const EdgeAssignment assignment = EdgeAssignment::identity(kSlateSize);
  const int n_edges = assignment.edge_count();

  Rng rng(seed);
  CoagentLayer layer = CoagentLayer::init_uniform(config.unit_count, pool.feature_dim(),
                                                  config.init_scale, rng);
  std::vector<double> episode_returns(config.episodes, 0.0);
  for (std::uint64_t ep = 0; ep < config.episodes; ++ep) {
    const EpisodeTrace trace =
        run_episode(pool, layer, variant, unreliability, rng, config.gamma);
    if (config.agent == AgentKind::Coagent) {
      layer = reinforce_update(layer, trace.records, trace.returns, config.alpha,
                               config.gamma);
    } else {
      const int edge = cd_schedule(ep, n_edges);
      layer = cd_update(layer, trace.records, trace.returns, edge, assignment,
                        config.alpha, config.gamma);
    }
    episode_returns[ep] = trace.undiscounted_return();
  }
  return episode_returns;
}

namespace {

QueryPool obtain_pool(const ExperimentConfig& config) {
  if (!config.pool_cache.empty() && fs::exists(config.pool_cache)) {
    QueryPool pool = load_pool(config.pool_cache);
    if (pool.kind() != config.dataset)
      throw DatasetError("pool cache '" + config.pool_cache +
                         "' holds a different dataset kind");
    return pool;
  }
  if (config.dataset_paths.empty())
    throw DatasetError("pool cache '" + config.pool_cache +
                       "' does not exist and no dataset_path is configured");
  for (const std::string& path : config.dataset_paths) {
    std::ifstream probe(path);
    if (!probe) throw DatasetError("cannot read dataset file '" + path + "'");
  }
  QueryPool pool = QueryPool::build(load_letor_files(config.dataset_paths), config.dataset);
  if (!config.pool_cache.empty()) save_pool(pool, config.pool_cache);
  return pool;
}

double sample_std(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  double acc = 0.0;
  for (const double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  QueryPool pool = obtain_pool(config);

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw OutputError("cannot create output directory '" + config.output_dir + "'");
  const std::string raw_path = (fs::path(config.output_dir) / "raw.csv").string();
  const std::string agg_path = (fs::path(config.output_dir) / "aggregate.csv").string();
  std::ofstream raw_csv(raw_path, std::ios::binary);
  std::ofstream agg_csv(agg_path, std::ios::binary);
  if (!raw_csv || !agg_csv)
    throw OutputError("cannot open output files under '" + config.output_dir + "'");

  const std::size_t n_levels = config.unreliability_levels.size();
  const std::size_t n_trials = static_cast<std::size_t>(config.trials);

  // Every (level, trial) cell has its own seed, so results do not depend on
  // which thread runs which cell.
  std::vector<std::vector<std::vector<double>>> raw(
      n_levels, std::vector<std::vector<double>>(n_trials));
  std::atomic<std::size_t> next_cell{0};
  const std::size_t n_cells = n_levels * n_trials;
  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::size_t>(config.threads, n_cells));
  auto worker = [&]() {
    while (true) {
      const std::size_t cell = next_cell.fetch_add(1);
      if (cell >= n_cells) return;
      const std::size_t level_index = cell / n_trials;
      const std::size_t trial_index = cell % n_trials;
      raw[level_index][trial_index] = run_single_trial(
          pool, config, config.unreliability_levels[level_index],
          trial_seed(config.base_seed, level_index, trial_index));
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  RunResult result;
  result.levels = config.unreliability_levels;
  result.raw = std::move(raw);
  result.raw_csv_path = raw_path;
  result.aggregate_csv_path = agg_path;

  raw_csv << "level,trial,episode,return\n";
  for (std::size_t li = 0; li < n_levels; ++li) {
    const std::string level_text = format_double(config.unreliability_levels[li]);
    for (std::size_t ti = 0; ti < n_trials; ++ti)
      for (std::size_t ep = 0; ep < result.raw[li][ti].size(); ++ep)
        raw_csv << level_text << ',' << ti << ',' << ep << ','
                << format_double(result.raw[li][ti][ep]) << '\n';
  }
  if (!raw_csv) throw OutputError("failed writing '" + raw_path + "'");
  raw_csv.close();

  result.mean_smoothed.resize(n_levels);
  result.std_smoothed.resize(n_levels);
  agg_csv << "level,episode,mean_smoothed,std_smoothed\n";
  std::vector<double> across(n_trials);
  for (std::size_t li = 0; li < n_levels; ++li) {
    std::vector<std::vector<double>> smoothed(n_trials);
    for (std::size_t ti = 0; ti < n_trials; ++ti)
      smoothed[ti] = smooth_curve(result.raw[li][ti], config.smoothing_window);
    const std::size_t n_episodes = smoothed[0].size();
    result.mean_smoothed[li].resize(n_episodes);
    result.std_smoothed[li].resize(n_episodes);
    const std::string level_text = format_double(config.unreliability_levels[li]);
    for (std::size_t ep = 0; ep < n_episodes; ++ep) {
      double mean = 0.0;
      for (std::size_t ti = 0; ti < n_trials; ++ti) {
        across[ti] = smoothed[ti][ep];
        mean += across[ti];
      }
      mean /= static_cast<double>(n_trials);
      const double std_dev = sample_std(across, mean);
      result.mean_smoothed[li][ep] = mean;
      result.std_smoothed[li][ep] = std_dev;
      agg_csv << level_text << ',' << ep << ',' << format_double(mean) << ','
              << format_double(std_dev) << '\n';
    }
  }
  if (!agg_csv) throw OutputError("failed writing '" + agg_path + "'");
  return result;
}

}  // namespace edgerec
