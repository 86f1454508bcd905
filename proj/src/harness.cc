#include "hetnet/harness.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "hetnet/baselines.h"
#include "hetnet/env.h"

namespace hetnet {

double action_to_power(int action, double p_max, int action_levels) {
  if (action_levels < 2 || action < 0 || action >= action_levels) {
    throw std::out_of_range("action index outside the power level set");
  }
  return static_cast<double>(action) * p_max / static_cast<double>(action_levels - 1);
}

namespace {

EnvConfig env_config(const ExperimentConfig& cfg) {
  EnvConfig env;
  env.noise_power_w = cfg.noise_power_w();
  env.shadow_sigma_db = cfg.shadowing_db;
  env.rho = cfg.correlation();
  env.neighbors = cfg.neighbors;
  return env;
}

LossKind loss_for(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kIql: return LossKind::kIql;
    case Algorithm::kHql: return LossKind::kHql;
    default: return LossKind::kPql;
  }
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

Evaluator::Evaluator(const ExperimentConfig& config) : config_(config) { config_.validate(); }

const std::vector<double>& Evaluator::wmmse_reference() {
  if (!wmmse_rates_.empty()) return wmmse_rates_;
  const EnvConfig env = env_config(config_);
  wmmse_rates_.reserve(static_cast<std::size_t>(config_.test_episodes) * config_.slots_per_episode);
  for (int e = 0; e < config_.test_episodes; ++e) {
    Rng rng = make_stream(config_.seed, "test-env", static_cast<std::uint64_t>(e));
    EnvState state = reset_episode(config_.topology, env, rng);
    for (int s = 0; s < config_.slots_per_episode; ++s) {
      const auto result = wmmse_solve(current_gains(state), config_.topology.p_max,
                                      state.noise_power, config_.wmmse);
      wmmse_rates_.push_back(result.sum_rate);
      // The channel stream does not depend on the transmitted powers.
      step(state, result.powers, rng);
    }
  }
  return wmmse_rates_;
}

EvalSummary Evaluator::evaluate(Algorithm algorithm, std::span<const DenseNet> nets) {
  const std::size_t k = config_.topology.size();
  if (is_learning(algorithm) && nets.size() != k) {
    throw std::invalid_argument("evaluation needs one network per access point");
  }
  for (std::size_t i = 0; i < nets.size() && is_learning(algorithm); ++i) {
    if (nets[i].widths() != config_.layer_widths(i)) {
      throw std::invalid_argument("network " + std::to_string(i) +
                                  " does not match the configured architecture");
    }
  }
  const auto& reference = wmmse_reference();
  const EnvConfig env = env_config(config_);
  const int slots = config_.slots_per_episode;

  EvalSummary summary;
  summary.episodes = config_.test_episodes;
  std::vector<double> powers(k);
  for (int e = 0; e < config_.test_episodes; ++e) {
    Rng rng = make_stream(config_.seed, "test-env", static_cast<std::uint64_t>(e));
    Rng policy_rng = make_stream(config_.seed, "test-policy", static_cast<std::uint64_t>(e));
    EnvState state = reset_episode(config_.topology, env, rng);
    EpisodeMetrics m;
    m.episode = e;
    m.agent_rewards.assign(k, 0.0);
    for (int s = 0; s < slots; ++s) {
      switch (algorithm) {
        case Algorithm::kFullPower: powers = full_power(config_.topology); break;
        case Algorithm::kRandom: powers = random_power(config_.topology, policy_rng); break;
        case Algorithm::kWmmse:
          powers = wmmse_solve(current_gains(state), config_.topology.p_max, state.noise_power,
                               config_.wmmse)
                       .powers;
          break;
        default:
          for (std::size_t i = 0; i < k; ++i) {
            const int a = greedy_action(nets[i].forward(observe(state, i)));
            powers[i] = action_to_power(a, config_.topology.p_max[i], config_.action_levels);
          }
      }
      const StepResult r = step(state, powers, rng);
      m.sum_rate += std::accumulate(r.rates.begin(), r.rates.end(), 0.0);
      m.wmmse_sum_rate += reference[static_cast<std::size_t>(e) * slots + s];
      for (std::size_t i = 0; i < k; ++i) m.agent_rewards[i] += r.rewards[i];
    }
    m.sum_rate /= slots;
    m.wmmse_sum_rate /= slots;
    for (double& r : m.agent_rewards) r /= slots;
    m.ratio = m.wmmse_sum_rate > 0.0 ? m.sum_rate / m.wmmse_sum_rate : 0.0;
    summary.per_episode.push_back(std::move(m));
  }
  summary.slots = summary.episodes * slots;

  std::vector<double> rates, ratios, wm;
  EpisodeMetrics& agg = summary.aggregate;
  agg.agent_rewards.assign(k, 0.0);
  for (const auto& m : summary.per_episode) {
    rates.push_back(m.sum_rate);
    ratios.push_back(m.ratio);
    wm.push_back(m.wmmse_sum_rate);
    for (std::size_t i = 0; i < k; ++i) agg.agent_rewards[i] += m.agent_rewards[i];
  }
  for (double& r : agg.agent_rewards) r /= summary.episodes;
  summary.mean_sum_rate = mean_of(rates);
  summary.std_sum_rate = std_of(rates);
  summary.mean_wmmse_sum_rate = mean_of(wm);
  summary.mean_ratio = mean_of(ratios);
  summary.std_ratio = std_of(ratios);
  agg.sum_rate = summary.mean_sum_rate;
  agg.wmmse_sum_rate = summary.mean_wmmse_sum_rate;
  agg.ratio = agg.wmmse_sum_rate > 0.0 ? agg.sum_rate / agg.wmmse_sum_rate : 0.0;
  return summary;
}

TrainingRun run_training(const ExperimentConfig& config, const EvalCallback& on_eval) {
  config.validate();
  const std::size_t k = config.topology.size();
  const bool learning = is_learning(config.algorithm);
  TrainingRun run;

  std::vector<Rng> explore, replay;
  if (learning) {
    AgentConfig agent_cfg = config.agent;
    agent_cfg.loss = loss_for(config.algorithm);
    for (std::size_t i = 0; i < k; ++i) {
      Rng init = make_stream(config.seed, "net-init", i);
      run.agents.push_back(make_agent(config.layer_widths(i), agent_cfg, init));
      explore.push_back(make_stream(config.seed, "explore", i));
      replay.push_back(make_stream(config.seed, "replay", i));
    }
  }

  Evaluator evaluator(config);
  std::optional<EpisodeMetrics> static_metrics;  // non-learning policies never change
  auto evaluate_point = [&](int episode) {
    EpisodeMetrics m;
    if (learning) {
      std::vector<DenseNet> nets;
      nets.reserve(k);
      for (const auto& a : run.agents) nets.push_back(a.online);
      m = evaluator.evaluate(config.algorithm, nets).aggregate;
    } else {
      if (!static_metrics) static_metrics = evaluator.evaluate(config.algorithm, {}).aggregate;
      m = *static_metrics;
    }
    m.episode = episode;
    run.metrics.push_back(m);
    if (on_eval) on_eval(run.metrics.back(), run.agents);
  };

  if (config.train_episodes == 0) {
    evaluate_point(0);
    return run;
  }

  const EnvConfig env = env_config(config);
  std::vector<Observation> obs(k), next(k);
  std::vector<int> actions(k);
  std::vector<double> powers(k);
  for (int ep = 0; ep < config.train_episodes; ++ep) {
    if (learning) {
      Rng rng = make_stream(config.seed, "train-env", static_cast<std::uint64_t>(ep));
      EnvState state = reset_episode(config.topology, env, rng);
      for (std::size_t i = 0; i < k; ++i) obs[i] = observe(state, i);
      for (int s = 0; s < config.slots_per_episode; ++s) {
        for (std::size_t i = 0; i < k; ++i) {
          actions[i] = select_action(run.agents[i], obs[i], explore[i], true);
          powers[i] = action_to_power(actions[i], config.topology.p_max[i], config.action_levels);
        }
        const StepResult r = step(state, powers, rng);
        for (std::size_t i = 0; i < k; ++i) {
          next[i] = observe(state, i);
          run.agents[i].buffer.push({obs[i], actions[i], r.rewards[i], next[i]});
          train_step(run.agents[i], replay[i]);
        }
        std::swap(obs, next);
        ++run.slots_trained;
      }
    }
    const int done = ep + 1;
    if (done % config.eval_interval == 0 || done == config.train_episodes) evaluate_point(done);
  }
  return run;
}

EvalSummary run_eval(const ExperimentConfig& config, std::span<const DenseNet> nets) {
  Evaluator evaluator(config);
  return evaluator.evaluate(config.algorithm, nets);
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t agent,
                                      Algorithm algorithm) {
  return dir / ("agent_" + std::to_string(agent) + "_" + std::string(algorithm_name(algorithm)) +
                ".txt");
}

std::vector<DenseNet> load_checkpoints(const ExperimentConfig& config,
                                       const std::filesystem::path& dir) {
  std::vector<DenseNet> nets;
  for (std::size_t i = 0; i < config.topology.size(); ++i) {
    DenseNet net = load_net(checkpoint_path(dir, i, config.algorithm));
    if (net.widths() != config.layer_widths(i)) {
      throw std::invalid_argument("checkpoint for agent " + std::to_string(i) +
                                  " does not match the configured architecture");
    }
    nets.push_back(std::move(net));
  }
  return nets;
}

namespace {

void append_value(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  if (ec != std::errc()) throw std::runtime_error("failed to format metric");
  out.append(buf, end);
}

}  // namespace

std::string metrics_csv(std::span<const EpisodeMetrics> metrics, std::size_t agents) {
  std::string out = "episode,slot_mean_sum_rate,wmmse_sum_rate,ratio";
  for (std::size_t i = 0; i < agents; ++i) out += ",agent_" + std::to_string(i) + "_reward";
  out += '\n';
  for (const auto& m : metrics) {
    if (m.agent_rewards.size() != agents) throw std::invalid_argument("reward column mismatch");
    out += std::to_string(m.episode);
    for (double v : {m.sum_rate, m.wmmse_sum_rate, m.ratio}) {
      out += ',';
      append_value(out, v);
    }
    for (double v : m.agent_rewards) {
      out += ',';
      append_value(out, v);
    }
    out += '\n';
  }
  return out;
}

void emit_metrics(std::span<const EpisodeMetrics> metrics, std::size_t agents,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << metrics_csv(metrics, agents);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<EpisodeMetrics> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("episode,slot_mean_sum_rate,wmmse_sum_rate,ratio", 0) != 0) {
    throw std::runtime_error("metrics CSV header missing");
  }
  std::vector<EpisodeMetrics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      double v = 0;
      auto [p, ec] = std::from_chars(line.data() + start, line.data() + comma, v);
      if (ec != std::errc() || p != line.data() + comma) {
        throw std::runtime_error("bad metrics field in line: " + line);
      }
      fields.push_back(v);
      start = comma + 1;
    }
    if (fields.size() < 4) throw std::runtime_error("short metrics row");
    EpisodeMetrics m;
    m.episode = static_cast<int>(fields[0]);
    m.sum_rate = fields[1];
    m.wmmse_sum_rate = fields[2];
    m.ratio = fields[3];
    m.agent_rewards.assign(fields.begin() + 4, fields.end());
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace hetnet
