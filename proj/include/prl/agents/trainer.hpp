#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prl/agents/config.hpp"
#include "prl/diagnostics/diagnostics.hpp"
#include "prl/interventions/interventions.hpp"
#include "prl/net/network.hpp"
#include "prl/prune/schedule.hpp"
#include "prl/replay/transition.hpp"

namespace prl::agents {

/// Everything one training run needs besides the seed.
struct RunSpec {
  std::string env_id = "cartpole";
  AgentConfig agent;
  net::Arch arch = net::Arch::mlp;
  std::size_t width_multiplier = 1;

  double final_sparsity = 0.0;
  double prune_start_frac = 0.2;
  double prune_end_frac = 0.8;
  std::uint64_t prune_interval = 100;
  prune::Scope prune_scope = prune::Scope::per_layer;
  bool prune_head = true;

  interventions::InterventionConfig intervention;

  std::uint64_t total_env_steps = 100000;  // online
  std::uint64_t total_grad_steps = 10000;  // offline
  std::uint64_t log_interval = 5000;       // env steps online, gradient steps offline
  double eps_decay_frac = 0.1;             // > 0 overrides agent.eps_decay_steps
  bool scale_support = true;               // C51 support = +-return_scale(env)

  std::size_t eval_episodes = 10;
  std::size_t final_eval_episodes = 100;
  double eval_epsilon = 0.001;
  std::size_t probe_size = 512;
  std::size_t covariance_probe = 0;  // examples per covariance matrix; 0 = off
  double srank_delta = 0.01;
  double dormant_tau = 0.025;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct CovarianceSnapshot {
  std::uint64_t step = 0;
  Matrix matrix;
};

struct RunResult {
  std::vector<diagnostics::MetricRecord> records;
  std::vector<CovarianceSnapshot> covariances;
  double final_return = 0.0;
  double final_normalized = 0.0;
  double best_return = 0.0;  // max periodic evaluation return
  double realized_sparsity = 0.0;
  std::uint64_t env_steps = 0;
  std::uint64_t grad_steps = 0;
  std::optional<net::Network> network;
  bool ok = true;
  std::string error;
};

/// Gradient steps an online run performs: floor(rr * (T - min_replay)).
std::uint64_t planned_grad_steps(const RunSpec& spec);

/// Pruning schedule of a run, laid over its gradient steps.
prune::PruneSchedule schedule_for(const RunSpec& spec, std::uint64_t total_grad_steps);

net::NetSpec net_spec_for(const RunSpec& spec);

/// Online training: interleaves env steps and updates at the replay ratio.
/// A non-finite loss ends the run with ok = false and a final record.
RunResult train_online(const RunSpec& spec, std::uint64_t seed);

/// Offline training on a fixed dataset: gradient steps only.
RunResult train_offline(const RunSpec& spec, const std::vector<replay::Transition>& dataset, std::uint64_t seed);

}  // namespace prl::agents
