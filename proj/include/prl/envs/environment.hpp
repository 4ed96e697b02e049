#pragma once

#include <cstddef>
#include <map>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "prl/tensor/rng.hpp"

namespace prl::envs {

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool terminated = false;  // true terminal state
  bool truncated = false;   // step cap reached
  bool done() const { return terminated || truncated; }
};

/// Episodic environment with a discrete action set.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual std::size_t observation_dim() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual std::size_t max_episode_steps() const = 0;

  virtual std::vector<double> reset() = 0;
  /// Throws std::invalid_argument for an out-of-range action.
  virtual StepResult step(std::size_t action) = 0;

  std::size_t steps() const { return steps_; }

 protected:
  void check_action(std::size_t action) const;
  std::size_t steps_ = 0;
};

/// `id` in {cartpole, catch, gridworld}. Throws std::invalid_argument otherwise.
std::unique_ptr<Environment> make_environment(const std::string& id, RngStream rng);

const std::vector<std::string>& environment_ids();

/// Scale for the default C51 support: returns are expected in +-scale.
double return_scale(const std::string& id, double gamma);

// ---- score normalisation ----

struct ScoreReference {
  double random = 0.0;     // mean return of a uniform-random policy
  double reference = 1.0;  // solver-level return
};

using ScoreRegistry = std::map<std::string, ScoreReference>;

/// Constants shipped with the build (see data/normalization.txt; regenerate
/// with `prl calibrate`).
const ScoreRegistry& builtin_registry();

double normalized_score(double raw, const ScoreReference& ref);

/// (raw - random) / (reference - random). Throws std::invalid_argument for
/// an unregistered env.
double human_normalized_score(const std::string& env_id, double raw, const ScoreRegistry& reg = builtin_registry());

/// Mean return of a uniform-random policy over `episodes` episodes.
double measure_random_return(const std::string& env_id, std::size_t episodes, std::uint64_t seed);

/// Recomputes every registry entry: random baselines by measurement,
/// references from the environment definitions.
ScoreRegistry calibrate_registry(std::size_t episodes = 10000, std::uint64_t seed = 0);

ScoreRegistry load_registry(const std::string& path);
void save_registry(const std::string& path, const ScoreRegistry& reg);

}  // namespace prl::envs
