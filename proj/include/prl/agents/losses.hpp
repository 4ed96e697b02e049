#pragma once

#include <span>
#include <vector>

#include "prl/agents/config.hpp"
#include "prl/net/network.hpp"
#include "prl/replay/transition.hpp"

namespace prl::agents {

struct LossResult {
  double loss = 0.0;
  double base_loss = 0.0;    // TD or cross-entropy part
  double penalty = 0.0;      // CQL regulariser (before cql_alpha)
  std::vector<double> td;    // per item: y - Q (scalar) or cross-entropy (C51); used as priority
  std::vector<double> targets;  // per item TD target (expected value for C51)
  net::Gradients grads;
};

/// Rows = observations (or next observations) of the batch.
Matrix stack_observations(std::span<const replay::Transition> batch, bool next);

/// Squared TD error against y = R + gamma^h max_a' Qbar(x', a') (no bootstrap
/// when done), averaged over the batch with optional importance weights.
/// Throws std::domain_error on a non-finite target.
LossResult dqn_td_loss(const net::Network& online, const net::Network& target,
                       std::span<const replay::Transition> batch, double gamma, std::span<const double> weights = {},
                       LossKind kind = LossKind::mse);

/// Projects the distribution `next_dist` on `support` through
/// z -> clamp(reward + discount * z) back onto `support`, splitting each
/// atom's mass linearly between its two neighbours.
/// Throws std::invalid_argument for a support with < 2 atoms or non-increasing ends.
std::vector<double> c51_project(std::span<const double> next_dist, double reward, double discount,
                                std::span<const double> support);

/// Cross-entropy between the projected target distribution (target net,
/// at the target net's greedy action) and the online distribution.
LossResult c51_loss(const net::Network& online, const net::Network& target, std::span<const replay::Transition> batch,
                    double gamma, std::span<const double> weights = {});

/// logsumexp_a q_a - q_{action}.
double cql_penalty(std::span<const double> q, std::size_t action);

/// Base loss (TD for scalar heads, C51 for categorical) plus
/// cql_alpha * mean(logsumexp_a Q(x, a) - Q(x, a_data)).
LossResult cql_loss(const net::Network& online, const net::Network& target, std::span<const replay::Transition> batch,
                    const AgentConfig& cfg);

/// The loss the agent trains with, dispatched on cfg.kind.
LossResult agent_loss(const net::Network& online, const net::Network& target, std::span<const replay::Transition> batch,
                      const AgentConfig& cfg, std::span<const double> weights = {});

}  // namespace prl::agents
