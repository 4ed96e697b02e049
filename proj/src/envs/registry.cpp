#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "prl/envs/cartpole.hpp"
#include "prl/envs/catch.hpp"
#include "prl/envs/environment.hpp"
#include "prl/envs/gridworld.hpp"

namespace prl::envs {

void Environment::check_action(std::size_t action) const {
  if (action >= num_actions()) {
    throw std::invalid_argument(id() + ": invalid action " + std::to_string(action) + " (have " +
                                std::to_string(num_actions()) + ")");
  }
}

std::unique_ptr<Environment> make_environment(const std::string& id, RngStream rng) {
  if (id == "cartpole") return std::make_unique<CartPole>(rng);
  if (id == "catch") return std::make_unique<Catch>(rng);
  if (id == "gridworld") return std::make_unique<GridWorld>(rng);
  throw std::invalid_argument("unknown env '" + id + "' (expected cartpole|catch|gridworld)");
}

const std::vector<std::string>& environment_ids() {
  static const std::vector<std::string> ids = {"cartpole", "catch", "gridworld"};
  return ids;
}

double return_scale(const std::string& id, double gamma) {
  if (id == "cartpole") return std::min(static_cast<double>(CartPole::kMaxSteps), 1.0 / (1.0 - gamma));
  if (id == "catch" || id == "gridworld") return 1.0;
  throw std::invalid_argument("unknown env '" + id + "'");
}

const ScoreRegistry& builtin_registry() {
  // Random baselines: mean return of a uniform policy over 10000 episodes,
  // seed 0 (`prl calibrate`). GridWorld reference: finite-horizon value
  // iteration over the 100-step cap.
  static const ScoreRegistry reg = {
      {"cartpole", {22.452999999999999, 500.0}},
      {"catch", {-0.8044, 1.0}},
      {"gridworld", {-0.93910000000000005, 0.99784419899193821}},
  };
  return reg;
}

double normalized_score(double raw, const ScoreReference& ref) {
  return (raw - ref.random) / (ref.reference - ref.random);
}

double human_normalized_score(const std::string& env_id, double raw, const ScoreRegistry& reg) {
  const auto it = reg.find(env_id);
  if (it == reg.end()) throw std::invalid_argument("no normalisation constants registered for env '" + env_id + "'");
  return normalized_score(raw, it->second);
}

double measure_random_return(const std::string& env_id, std::size_t episodes, std::uint64_t seed) {
  RngStream root(seed, 0);
  auto env = make_environment(env_id, root.split(1));
  RngStream policy = root.split(2);
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    env->reset();
    for (;;) {
      const auto r = env->step(static_cast<std::size_t>(policy.uniform_index(env->num_actions())));
      total += r.reward;
      if (r.done()) break;
    }
  }
  return total / static_cast<double>(episodes);
}

ScoreRegistry calibrate_registry(std::size_t episodes, std::uint64_t seed) {
  ScoreRegistry reg;
  reg["cartpole"] = {measure_random_return("cartpole", episodes, seed), 500.0};
  reg["catch"] = {measure_random_return("catch", episodes, seed), 1.0};
  reg["gridworld"] = {measure_random_return("gridworld", episodes, seed), GridWorld::optimal_return()};
  return reg;
}

ScoreRegistry load_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open registry " + path);
  ScoreRegistry reg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq;
    double value;
    if (!(ls >> key)) continue;
    if (!(ls >> eq >> value) || eq != "=") {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'env.field = value'");
    }
    const auto dot = key.find('.');
    const std::string env = key.substr(0, dot);
    const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
    if (field == "random") reg[env].random = value;
    else if (field == "reference") reg[env].reference = value;
    else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown field '" + key + "'");
  }
  return reg;
}

void save_registry(const std::string& path, const ScoreRegistry& reg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write registry " + path);
  out << "# Score normalisation constants: normalized = (raw - random) / (reference - random)\n";
  out << std::setprecision(17);
  for (const auto& [env, ref] : reg) {
    out << env << ".random = " << ref.random << "\n";
    out << env << ".reference = " << ref.reference << "\n";
  }
}

}  // namespace prl::envs
