#include "hetnet/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hetnet {

using nlohmann::json;

Algorithm parse_algorithm(std::string_view name) {
  if (name == "pql") return Algorithm::kPql;
  if (name == "iql") return Algorithm::kIql;
  if (name == "hql") return Algorithm::kHql;
  if (name == "full_power") return Algorithm::kFullPower;
  if (name == "random") return Algorithm::kRandom;
  if (name == "wmmse") return Algorithm::kWmmse;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kPql: return "pql";
    case Algorithm::kIql: return "iql";
    case Algorithm::kHql: return "hql";
    case Algorithm::kFullPower: return "full_power";
    case Algorithm::kRandom: return "random";
    case Algorithm::kWmmse: return "wmmse";
  }
  return "?";
}

bool is_learning(Algorithm algorithm) {
  return algorithm == Algorithm::kPql || algorithm == Algorithm::kIql ||
         algorithm == Algorithm::kHql;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double ExperimentConfig::correlation() const {
  return rho ? *rho : correlation_coefficient(doppler_hz, slot_seconds);
}

std::vector<int> ExperimentConfig::layer_widths(std::size_t agent) const {
  std::vector<int> widths{static_cast<int>(observation_size(neighbors))};
  const auto& hidden = tier_hidden.at(static_cast<std::size_t>(topology.tiers.at(agent) - 1));
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(action_levels);
  return widths;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  topology.validate();
  if (topology.size() < 2) fail("need at least two access points");
  if (neighbors > topology.size() - 1) fail("neighbors exceeds K - 1");
  if (action_levels < 2) fail("action_levels must be >= 2");
  if (!(doppler_hz >= 0.0) || !(slot_seconds > 0.0)) fail("Doppler/slot duration invalid");
  if (rho && !(*rho >= -1.0 && *rho <= 1.0)) fail("rho must lie in [-1, 1]");
  if (!std::isfinite(noise_dbm)) fail("noise power invalid");
  if (!(shadowing_db >= 0.0)) fail("shadowing std must be >= 0");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth must be positive");
  if (slots_per_episode < 2) fail("slots_per_episode must be >= 2");
  if (train_episodes < 0 || test_episodes < 1 || eval_interval < 1) fail("episode counts invalid");
  for (const auto& hidden : tier_hidden) {
    for (int w : hidden) {
      if (w < 1) fail("hidden widths must be >= 1");
    }
  }
  agent.validate();
  wmmse.validate();
}

Topology preset_topology(std::string_view preset) {
  Topology t;
  auto add = [&](double x, double y, int tier) {
    static constexpr double kDbm[] = {30.0, 20.0, 10.0};
    static constexpr double kDmax[] = {1000.0, 200.0, 100.0};
    t.ap_positions.push_back({x, y});
    t.tiers.push_back(tier);
    t.p_max.push_back(dbm_to_watts(kDbm[tier - 1]));
    t.d_min.push_back(10.0);
    t.d_max.push_back(kDmax[tier - 1]);
  };
  if (preset != "hetnet9" && preset != "hetnet13" && preset != "hetnet9-hetero") {
    throw std::invalid_argument("unknown preset '" + std::string(preset) + "'");
  }
  add(0, 0, 1);
  add(500, 0, 2);
  add(0, 500, 2);
  add(-500, 0, 2);
  add(0, -500, 2);
  add(700, 0, 3);
  add(0, 700, 3);
  add(-700, 0, 3);
  add(0, -700, 3);
  if (preset == "hetnet13") {
    const double c = 250.0 * std::sqrt(2.0);
    add(c, c, 3);
    add(c, -c, 3);
    add(-c, -c, 3);
    add(-c, c, 3);
  }
  return t;
}

ExperimentConfig preset_config(std::string_view preset) {
  ExperimentConfig cfg;
  cfg.preset = std::string(preset);
  cfg.topology = preset_topology(preset);
  if (preset == "hetnet9-hetero") cfg.tier_hidden = {{{128, 128, 64}, {128, 64}, {64, 64}}};
  return cfg;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("config: bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  reject_unknown(doc,
                 {"preset", "access_points", "neighbors", "action_levels", "doppler_hz",
                  "slot_seconds", "rho", "noise_dbm", "shadowing_db", "bandwidth_hz",
                  "slots_per_episode", "train_episodes", "test_episodes", "eval_interval",
                  "algorithm", "tier_hidden_widths", "agent", "wmmse", "seed",
                  "save_checkpoints"},
                 "top level");

  std::string preset = "hetnet9";
  read(doc, "preset", preset);
  ExperimentConfig cfg = preset_config(preset);

  if (auto it = doc.find("access_points"); it != doc.end()) {
    if (!it->is_array()) throw std::invalid_argument("config: access_points must be an array");
    Topology t;
    for (const auto& ap : *it) {
      reject_unknown(ap, {"x", "y", "tier", "p_max_dbm", "d_min", "d_max"}, "access_points");
      Point p;
      int tier = 0;
      double dbm = 0, d_min = 0, d_max = 0;
      for (const char* key : {"x", "y", "tier", "p_max_dbm", "d_min", "d_max"}) {
        if (!ap.contains(key)) {
          throw std::invalid_argument(std::string("config: access point missing '") + key + "'");
        }
      }
      read(ap, "x", p.x);
      read(ap, "y", p.y);
      read(ap, "tier", tier);
      read(ap, "p_max_dbm", dbm);
      read(ap, "d_min", d_min);
      read(ap, "d_max", d_max);
      t.ap_positions.push_back(p);
      t.tiers.push_back(tier);
      t.p_max.push_back(dbm_to_watts(dbm));
      t.d_min.push_back(d_min);
      t.d_max.push_back(d_max);
    }
    cfg.topology = std::move(t);
  }

  read(doc, "neighbors", cfg.neighbors);
  read(doc, "action_levels", cfg.action_levels);
  read(doc, "doppler_hz", cfg.doppler_hz);
  read(doc, "slot_seconds", cfg.slot_seconds);
  if (auto it = doc.find("rho"); it != doc.end() && !it->is_null()) {
    double rho = 0;
    read(doc, "rho", rho);
    cfg.rho = rho;
  }
  read(doc, "noise_dbm", cfg.noise_dbm);
  read(doc, "shadowing_db", cfg.shadowing_db);
  read(doc, "bandwidth_hz", cfg.bandwidth_hz);
  read(doc, "slots_per_episode", cfg.slots_per_episode);
  read(doc, "train_episodes", cfg.train_episodes);
  read(doc, "test_episodes", cfg.test_episodes);
  read(doc, "eval_interval", cfg.eval_interval);
  if (auto it = doc.find("algorithm"); it != doc.end()) {
    cfg.algorithm = parse_algorithm(it->get<std::string>());
  }
  if (auto it = doc.find("tier_hidden_widths"); it != doc.end()) {
    std::vector<std::vector<int>> tiers;
    read(doc, "tier_hidden_widths", tiers);
    if (tiers.size() != 3) throw std::invalid_argument("config: tier_hidden_widths needs 3 lists");
    for (std::size_t i = 0; i < 3; ++i) cfg.tier_hidden[i] = tiers[i];
  }
  if (auto it = doc.find("agent"); it != doc.end()) {
    const json& a = *it;
    reject_unknown(a,
                   {"gamma", "penalty_beta", "t1_fraction", "t2", "epsilon_scale", "epsilon_base",
                    "epsilon_floor", "target_sync_period", "batch_size", "replay_capacity",
                    "learning_rate", "hql_degraded_rate"},
                   "agent");
    read(a, "gamma", cfg.agent.gamma);
    read(a, "penalty_beta", cfg.agent.beta_penalty);
    read(a, "t1_fraction", cfg.agent.t1_fraction);
    read(a, "t2", cfg.agent.t2);
    read(a, "epsilon_scale", cfg.agent.epsilon.scale);
    read(a, "epsilon_base", cfg.agent.epsilon.base);
    read(a, "epsilon_floor", cfg.agent.epsilon.floor);
    read(a, "target_sync_period", cfg.agent.target_sync_period);
    read(a, "batch_size", cfg.agent.batch_size);
    read(a, "replay_capacity", cfg.agent.replay_capacity);
    read(a, "learning_rate", cfg.agent.learning_rate);
    read(a, "hql_degraded_rate", cfg.agent.hql_degraded_rate);
  }
  if (auto it = doc.find("wmmse"); it != doc.end()) {
    reject_unknown(*it, {"max_iterations", "tolerance", "multi_start"}, "wmmse");
    read(*it, "max_iterations", cfg.wmmse.max_iterations);
    read(*it, "tolerance", cfg.wmmse.tolerance);
    read(*it, "multi_start", cfg.wmmse.multi_start);
  }
  read(doc, "seed", cfg.seed);
  read(doc, "save_checkpoints", cfg.save_checkpoints);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json aps = json::array();
  for (std::size_t k = 0; k < cfg.topology.size(); ++k) {
    aps.push_back({{"x", cfg.topology.ap_positions[k].x},
                   {"y", cfg.topology.ap_positions[k].y},
                   {"tier", cfg.topology.tiers[k]},
                   {"p_max_dbm", 10.0 * std::log10(cfg.topology.p_max[k]) + 30.0},
                   {"d_min", cfg.topology.d_min[k]},
                   {"d_max", cfg.topology.d_max[k]}});
  }
  json doc = {
      {"preset", cfg.preset},
      {"access_points", aps},
      {"neighbors", cfg.neighbors},
      {"action_levels", cfg.action_levels},
      {"doppler_hz", cfg.doppler_hz},
      {"slot_seconds", cfg.slot_seconds},
      {"rho", cfg.rho ? json(*cfg.rho) : json(nullptr)},
      {"noise_dbm", cfg.noise_dbm},
      {"shadowing_db", cfg.shadowing_db},
      {"bandwidth_hz", cfg.bandwidth_hz},
      {"slots_per_episode", cfg.slots_per_episode},
      {"train_episodes", cfg.train_episodes},
      {"test_episodes", cfg.test_episodes},
      {"eval_interval", cfg.eval_interval},
      {"algorithm", std::string(algorithm_name(cfg.algorithm))},
      {"tier_hidden_widths", {cfg.tier_hidden[0], cfg.tier_hidden[1], cfg.tier_hidden[2]}},
      {"agent",
       {{"gamma", cfg.agent.gamma},
        {"penalty_beta", cfg.agent.beta_penalty},
        {"t1_fraction", cfg.agent.t1_fraction},
        {"t2", cfg.agent.t2},
        {"epsilon_scale", cfg.agent.epsilon.scale},
        {"epsilon_base", cfg.agent.epsilon.base},
        {"epsilon_floor", cfg.agent.epsilon.floor},
        {"target_sync_period", cfg.agent.target_sync_period},
        {"batch_size", cfg.agent.batch_size},
        {"replay_capacity", cfg.agent.replay_capacity},
        {"learning_rate", cfg.agent.learning_rate},
        {"hql_degraded_rate", cfg.agent.hql_degraded_rate}}},
      {"wmmse",
       {{"max_iterations", cfg.wmmse.max_iterations},
        {"tolerance", cfg.wmmse.tolerance},
        {"multi_start", cfg.wmmse.multi_start}}},
      {"seed", cfg.seed},
      {"save_checkpoints", cfg.save_checkpoints},
  };
  return doc.dump(2) + "\n";
}

}  // namespace hetnet
