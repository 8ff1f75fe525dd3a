#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgerec/harness.hpp"
#include "edgerec/plot.hpp"
#include "edgerec/synthetic.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
  edgerec::ExperimentConfig config;
  if (!config_path.empty()) config = edgerec::load_config_file(config_path);
  for (std::size_t i = 0; i + 1 < overrides.size(); i += 2)
    edgerec::apply_config_entry(config, overrides[i], overrides[i + 1]);

  const edgerec::RunResult result = edgerec::run_experiment(config);
  std::cout << "wrote " << result.raw_csv_path << "\n";
  std::cout << "wrote " << result.aggregate_csv_path << "\n";
  for (std::size_t li = 0; li < result.levels.size(); ++li)
    std::cout << "p=" << edgerec::format_double(result.levels[li])
              << " final smoothed return (mean over trials): "
              << edgerec::format_double(result.mean_smoothed[li].back()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous coagent-network edge recommendation experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a seeded multi-trial experiment sweep");
  std::string config_path;
  run->add_option("--config", config_path, "key = value config file");
  std::string agent, levels, out_dir;
  std::uint64_t episodes = 0, trials = 0, seed = 0;
  bool has_episodes = false, has_trials = false, has_seed = false;
  run->add_option("--agent", agent, "coagent or cd");
  run->add_option("--levels", levels, "comma-separated unreliability levels");
  run->add_option("--episodes", episodes, "episodes per trial")
      ->each([&](const std::string&) { has_episodes = true; });
  run->add_option("--trials", trials, "trials per level")
      ->each([&](const std::string&) { has_trials = true; });
  run->add_option("--seed", seed, "base seed")
      ->each([&](const std::string&) { has_seed = true; });
  run->add_option("--out", out_dir, "output directory");

  // plot
  auto* plot = app.add_subcommand("plot", "Render an aggregate CSV as an SVG figure");
  std::string plot_in, plot_out;
  plot->add_option("--in", plot_in, "aggregate CSV path")->required();
  plot->add_option("--out", plot_out, "output SVG path")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic LETOR-format dataset");
  std::string synth_dataset = "mq2008", synth_out;
  std::uint64_t synth_queries = 150, synth_dim = 8, synth_seed = 7;
  synth->add_option("--dataset", synth_dataset, "mslr or mq2008");
  synth->add_option("--queries", synth_queries, "number of queries");
  synth->add_option("--dim", synth_dim, "feature dimension");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::vector<std::string> overrides;
      auto push = [&](const char* key, const std::string& value) {
        overrides.emplace_back(key);
        overrides.push_back(value);
      };
      if (!agent.empty()) push("agent", agent);
      if (!levels.empty()) push("levels", levels);
      if (has_episodes) push("episodes", std::to_string(episodes));
      if (has_trials) push("trials", std::to_string(trials));
      if (has_seed) push("seed", std::to_string(seed));
      if (!out_dir.empty()) push("output_dir", out_dir);
      return cmd_run(config_path, overrides);
    }
    if (plot->parsed()) {
      edgerec::emit_plot(plot_in, plot_out);
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
    if (synth->parsed()) {
      edgerec::SyntheticSpec spec;
      spec.kind = edgerec::dataset_from_name(synth_dataset);
      spec.query_count = synth_queries;
      spec.feature_dim = synth_dim;
      edgerec::write_synthetic_letor(spec, synth_seed, synth_out);
      std::cout << "wrote " << synth_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
