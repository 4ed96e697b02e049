#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prl/agents/config.hpp"
#include "prl/envs/environment.hpp"
#include "prl/net/network.hpp"
#include "prl/tensor/rng.hpp"

namespace prl::agents {

/// Index of the largest value; ties go to the lowest index.
std::size_t greedy_action(std::span<const double> q);

/// Epsilon-greedy over the network's q-values (expected values for a
/// categorical head).
std::size_t select_action(const net::Network& net, std::span<const double> obs, double epsilon, RngStream& rng);

/// Linear decay from eps_start to eps_end over eps_decay_steps env steps.
double epsilon_at(const AgentConfig& cfg, std::uint64_t step);

struct EvalResult {
  double mean_return = 0.0;
  std::vector<double> returns;
};

EvalResult evaluate(const net::Network& net, envs::Environment& env, std::size_t episodes, double epsilon,
                    RngStream& rng);

}  // namespace prl::agents
