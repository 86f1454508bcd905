// Command-line driver: train, eval, baseline, matrix-game.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetnet/config.h"
#include "hetnet/harness.h"
#include "hetnet/tabular.h"

namespace fs = std::filesystem;
using namespace hetnet;

namespace {

struct CommonFlags {
  std::string config;
  std::string out = "run";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  std::optional<std::string> preset;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--algorithm", f.algorithm, "pql|iql|hql|full_power|random|wmmse");
  cmd->add_option("--preset", f.preset, "hetnet9|hetnet13|hetnet9-hetero");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) {
    cfg = load_config(f.config);
  } else {
    cfg = preset_config(f.preset.value_or("hetnet9"));
  }
  if (f.preset && !f.config.empty() && *f.preset != cfg.preset) {
    // An explicit preset replaces the topology and widths from the file.
    const ExperimentConfig p = preset_config(*f.preset);
    cfg.preset = p.preset;
    cfg.topology = p.topology;
    cfg.tier_hidden = p.tier_hidden;
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.algorithm) cfg.algorithm = parse_algorithm(*f.algorithm);
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg, const std::string& command) {
  nlohmann::json manifest = {
      {"command", command},
      {"seed", cfg.seed},
      {"correlation", cfg.correlation()},
      {"noise_power_w", cfg.noise_power_w()},
      {"config", nlohmann::json::parse(config_to_json(cfg))},
  };
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

void print_summary(const EvalSummary& s) {
  std::cout << "episodes " << s.episodes << ", slots " << s.slots << "\n"
            << "sum rate  mean " << s.mean_sum_rate << " std " << s.std_sum_rate << "\n"
            << "wmmse     mean " << s.mean_wmmse_sum_rate << "\n"
            << "ratio     mean " << s.mean_ratio << " std " << s.std_ratio << "\n";
}

nlohmann::json summary_json(const EvalSummary& s) {
  return {{"episodes", s.episodes},         {"slots", s.slots},
          {"mean_sum_rate", s.mean_sum_rate}, {"std_sum_rate", s.std_sum_rate},
          {"mean_wmmse_sum_rate", s.mean_wmmse_sum_rate},
          {"mean_ratio", s.mean_ratio},     {"std_ratio", s.std_ratio}};
}

int cmd_train(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const fs::path out = f.out;
  fs::create_directories(out);
  write_manifest(out, cfg, "train");
  const std::size_t k = cfg.topology.size();
  std::vector<EpisodeMetrics> seen;
  auto on_eval = [&](const EpisodeMetrics& m, std::span<const Agent> agents) {
    seen.push_back(m);
    emit_metrics(seen, k, out / "metrics.csv");
    std::cout << "episode " << m.episode << "  sum rate " << m.sum_rate << "  wmmse "
              << m.wmmse_sum_rate << "  ratio " << m.ratio << std::endl;
    if (cfg.save_checkpoints && !agents.empty()) {
      const fs::path dir = out / "checkpoints" / ("episode_" + std::to_string(m.episode));
      fs::create_directories(dir);
      for (std::size_t i = 0; i < agents.size(); ++i) {
        save_net(agents[i].online, checkpoint_path(dir, i, cfg.algorithm));
      }
    }
  };
  const TrainingRun run = run_training(cfg, on_eval);
  emit_metrics(run.metrics, k, out / "metrics.csv");
  return 0;
}

int cmd_eval(const CommonFlags& f, const std::string& checkpoints) {
  const ExperimentConfig cfg = resolve(f);
  if (!is_learning(cfg.algorithm)) {
    throw std::invalid_argument("eval needs a learning algorithm; use 'baseline' otherwise");
  }
  const fs::path out = f.out;
  fs::create_directories(out);
  write_manifest(out, cfg, "eval");
  const auto nets = load_checkpoints(cfg, checkpoints);
  const EvalSummary s = run_eval(cfg, nets);
  emit_metrics(s.per_episode, cfg.topology.size(), out / "eval_metrics.csv");
  write_text(out / "eval_summary.json", summary_json(s).dump(2) + "\n");
  print_summary(s);
  return 0;
}

int cmd_baseline(const CommonFlags& f) {
  CommonFlags flags = f;
  if (!flags.algorithm) flags.algorithm = "wmmse";
  const ExperimentConfig cfg = resolve(flags);
  if (is_learning(cfg.algorithm)) {
    throw std::invalid_argument("baseline takes full_power, random or wmmse");
  }
  const fs::path out = f.out;
  fs::create_directories(out);
  write_manifest(out, cfg, "baseline");
  const EvalSummary s = run_eval(cfg, {});
  emit_metrics(s.per_episode, cfg.topology.size(), out / "baseline_metrics.csv");
  write_text(out / "baseline_summary.json", summary_json(s).dump(2) + "\n");
  print_summary(s);
  return 0;
}

struct GameFlags {
  std::string algorithm = "pql";
  std::string out = "matrix_game";
  std::uint64_t seed = 1;
  int episodes = 1000;
  double alpha = 0.1;
  double beta = 1.0;
  double t1 = 2.0;
  double t2 = 20.0;
  double epsilon = 0.5;
};

int cmd_matrix_game(const GameFlags& g) {
  using namespace hetnet::tabular;
  const MatrixGame game = climbing_game();
  const UpdateRule rule = g.algorithm == "pql"   ? UpdateRule::kPql
                          : g.algorithm == "iql" ? UpdateRule::kIql
                                                 : throw std::invalid_argument(
                                                       "matrix-game takes pql or iql");
  const TabularParams params{g.alpha, rule == UpdateRule::kPql ? g.beta : 0.0, g.t1, g.t2, 0.0};
  auto learners = make_learners(game, params, rule);
  Rng rng = make_stream(g.seed, "matrix-game");
  const PlayResult r = play_matrix_game(game, learners, {g.episodes, g.epsilon, 0.0}, rng);

  fs::create_directories(g.out);
  std::string csv = "episode,reward";
  for (int i = 0; i < game.players(); ++i) csv += ",action_" + std::to_string(i);
  csv += "\n";
  for (std::size_t e = 0; e < r.rewards.size(); ++e) {
    csv += std::to_string(e) + "," + std::to_string(r.rewards[e]);
    for (int a : r.actions[e]) csv += "," + std::to_string(a);
    csv += "\n";
  }
  write_text(fs::path(g.out) / "matrix_game.csv", csv);
  std::cout << "final greedy joint action:";
  for (const auto& l : learners) std::cout << " " << l.table.greedy(0);
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HetNet multi-agent power control testbed"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, base_flags;
  std::string checkpoints;
  GameFlags game;

  auto* train = app.add_subcommand("train", "train agents and write metrics/checkpoints");
  add_common(train, train_flags);
  auto* eval = app.add_subcommand("eval", "greedy evaluation of saved checkpoints");
  add_common(eval, eval_flags);
  eval->add_option("--checkpoints", checkpoints, "directory holding agent_<k>_<alg>.txt")
      ->required();
  auto* baseline = app.add_subcommand("baseline", "evaluate full_power, random or wmmse");
  add_common(baseline, base_flags);
  auto* mg = app.add_subcommand("matrix-game", "tabular IQL/PQL on the climbing game");
  mg->add_option("--algorithm", game.algorithm, "pql|iql");
  mg->add_option("--out", game.out, "output directory");
  mg->add_option("--seed", game.seed, "seed");
  mg->add_option("--episodes", game.episodes, "plays of the game");
  mg->add_option("--alpha", game.alpha, "learning rate");
  mg->add_option("--beta", game.beta, "penalty");
  mg->add_option("--t1", game.t1, "significance threshold");
  mg->add_option("--t2", game.t2, "closeness threshold");
  mg->add_option("--epsilon", game.epsilon, "initial exploration rate");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(train_flags);
    if (*eval) return cmd_eval(eval_flags, checkpoints);
    if (*baseline) return cmd_baseline(base_flags);
    if (*mg) return cmd_matrix_game(game);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
