#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "prl/net/adam.hpp"
#include "prl/replay/replay_buffer.hpp"

namespace prl::agents {

/// dqn: scalar head, uniform replay. rainbow-lite: n-step + prioritized
/// replay + C51. cql / cql-c51: offline variants of the two heads.
enum class AgentKind { dqn, rainbow_lite, cql, cql_c51 };

AgentKind parse_agent(const std::string& s);
std::string to_string(AgentKind k);

enum class LossKind { mse, huber };

LossKind parse_loss(const std::string& s);
std::string to_string(LossKind k);

struct AgentConfig {
  AgentKind kind = AgentKind::dqn;
  double gamma = 0.99;
  std::size_t n_step = 1;
  double replay_ratio = 0.25;
  double eps_start = 1.0;
  double eps_end = 0.01;
  std::uint64_t eps_decay_steps = 10000;
  std::uint64_t target_sync_period = 1000;
  std::size_t num_atoms = 51;
  double v_min = -10.0;
  double v_max = 10.0;
  double cql_alpha = 1.0;
  std::size_t batch_size = 32;
  std::size_t min_replay_history = 1000;
  LossKind loss = LossKind::mse;
  net::AdamConfig adam;
  replay::ReplayConfig replay;

  bool categorical() const { return kind == AgentKind::rainbow_lite || kind == AgentKind::cql_c51; }
  bool offline() const { return kind == AgentKind::cql || kind == AgentKind::cql_c51; }

  /// Defaults that differ by agent: n-step 3 and prioritized replay for
  /// rainbow-lite, n-step 1 and uniform replay otherwise.
  static AgentConfig defaults_for(AgentKind kind);

  /// Throws std::invalid_argument unless gamma in [0, 1), replay_ratio > 0,
  /// v_min < v_max, n_step >= 1 and batch_size >= 1.
  void validate() const;
};

}  // namespace prl::agents
