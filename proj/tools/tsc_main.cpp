// Command-line front end: train, eval, compare, gradcheck.
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tsc/errors.hpp"
#include "tsc/harness/allocator.hpp"
#include "tsc/harness/runner.hpp"
#include "tsc/net/gradcheck.hpp"

namespace {

using namespace tsc;
using namespace tsc::harness;

int train(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
          const std::string& resume, bool quiet) {
  ExperimentConfig config = load_config(config_path);
  if (seed) config.seed = *seed;
  TrainOptions opt;
  if (!out.empty()) opt.output_dir = out;
  if (!resume.empty()) opt.resume = resume;
  if (!quiet) opt.log = &std::cerr;
  const RunArtifacts art = run_training(config, opt);
  std::cout << art.summary.dump(2) << "\n";
  return 0;
}

int eval(const std::string& config_path, const std::string& checkpoint, std::optional<int> episodes,
         const std::string& out) {
  ExperimentConfig config = load_config(config_path);
  std::optional<std::filesystem::path> ckpt;
  if (!checkpoint.empty()) ckpt = checkpoint;
  const EvaluationResult res = run_evaluation(config, ckpt, episodes.value_or(config.eval_episodes));
  std::vector<EpisodeRow> rows = res.rows;
  std::cout << kEpisodeHeader << "\n";
  for (const auto& r : rows) std::cout << to_csv_line(r) << "\n";
  std::cout << "mean," << to_csv_line(res.mean).substr(to_csv_line(res.mean).find(',') + 1) << "\n";
  const std::filesystem::path dir = out.empty() ? resolve_output_dir(config) : std::filesystem::path(out);
  std::filesystem::create_directories(dir);
  write_episode_csv(rows, dir / "evaluation.csv");
  return 0;
}

int compare_cmd(const std::vector<std::string>& paths, const std::string& out, bool quiet) {
  std::vector<ExperimentConfig> configs;
  for (const auto& p : paths) configs.push_back(load_config(p));
  compare(configs, out, quiet ? nullptr : &std::cerr);
  std::cout << "wrote " << out << "/{rewards,queue,delay,flow}.csv and manifest.json\n";
  return 0;
}

int gradcheck() {
  const net::GradCheckReport rep = net::run_gradient_suite({});
  std::cout << "architectures " << rep.architectures << ", values " << rep.values_checked
            << ", max relative error " << rep.max_relative_error << " (" << rep.worst << ")\n";
  return rep.max_relative_error < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  tsc::harness::keep_large_blocks_on_heap();
  CLI::App app{"Multi-agent actor-critic traffic signal control"};
  app.require_subcommand(1);

  std::string config, out, resume, checkpoint, configs_csv;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  bool quiet = false;

  auto* train_cmd = app.add_subcommand("train", "train one configuration");
  train_cmd->add_option("--config", config, "experiment JSON")->required();
  train_cmd->add_option("--seed", seed, "override the config seed");
  train_cmd->add_option("--out", out, "output directory (overrides TSC_OUTPUT_DIR and the config)");
  train_cmd->add_option("--resume", resume, "continue from a checkpoint written by the same config");
  train_cmd->add_flag("--quiet", quiet, "no per-episode progress on stderr");

  auto* eval_cmd = app.add_subcommand("eval", "greedy episodes from a checkpoint");
  eval_cmd->add_option("--config", config, "experiment JSON")->required();
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file (optional for fixed)");
  eval_cmd->add_option("--episodes", episodes, "number of episodes, seeds s, s+1, ...");
  eval_cmd->add_option("--out", out, "directory for evaluation.csv");

  auto* compare_sub = app.add_subcommand("compare", "train several configs and align their curves");
  compare_sub->add_option("--configs", configs_csv, "comma-separated config paths")->required();
  compare_sub->add_option("--out", out, "output directory")->required();
  compare_sub->add_flag("--quiet", quiet, "no per-episode progress on stderr");

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of the network library");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCategory::usage);
  }

  try {
    if (*train_cmd) return train(config, seed, out, resume, quiet);
    if (*eval_cmd) return eval(config, checkpoint, episodes, out);
    if (*compare_sub) {
      std::vector<std::string> paths;
      std::stringstream ss(configs_csv);
      for (std::string p; std::getline(ss, p, ',');)
        if (!p.empty()) paths.push_back(p);
      return compare_cmd(paths, out, quiet);
    }
    if (*grad_cmd) return gradcheck();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
