#include "prl/agents/acting.hpp"

#include <algorithm>
#include <stdexcept>

namespace prl::agents {

AgentKind parse_agent(const std::string& s) {
  if (s == "dqn") return AgentKind::dqn;
  if (s == "rainbow-lite" || s == "rainbow") return AgentKind::rainbow_lite;
  if (s == "cql") return AgentKind::cql;
  if (s == "cql-c51") return AgentKind::cql_c51;
  throw std::invalid_argument("unknown agent '" + s + "' (expected dqn|rainbow-lite|cql|cql-c51)");
}

std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::dqn: return "dqn";
    case AgentKind::rainbow_lite: return "rainbow-lite";
    case AgentKind::cql: return "cql";
    case AgentKind::cql_c51: return "cql-c51";
  }
  return "dqn";
}

LossKind parse_loss(const std::string& s) {
  if (s == "mse") return LossKind::mse;
  if (s == "huber") return LossKind::huber;
  throw std::invalid_argument("unknown loss '" + s + "' (expected mse|huber)");
}

std::string to_string(LossKind k) {
  return k == LossKind::mse ? "mse" : "huber";
}

AgentConfig AgentConfig::defaults_for(AgentKind kind) {
  AgentConfig c;
  c.kind = kind;
  if (kind == AgentKind::rainbow_lite) {
    c.n_step = 3;
    c.replay.prioritized = true;
  }
  return c;
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0, 1)");
  if (!(replay_ratio > 0.0)) throw std::invalid_argument("replay_ratio must be > 0");
  if (!(v_min < v_max)) throw std::invalid_argument("v_min must be < v_max");
  if (categorical() && num_atoms < 2) throw std::invalid_argument("num_atoms must be >= 2");
  if (n_step < 1) throw std::invalid_argument("n_step must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (target_sync_period < 1) throw std::invalid_argument("target_sync_period must be >= 1");
  if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0)) {
    throw std::invalid_argument("epsilon schedule endpoints must be in [0, 1]");
  }
}

std::size_t greedy_action(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("greedy_action: no actions");
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

std::size_t select_action(const net::Network& net, std::span<const double> obs, double epsilon, RngStream& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return static_cast<std::size_t>(rng.uniform_index(net.spec.n_actions));
  }
  return greedy_action(net::forward(net, obs, false).q_values);
}

double epsilon_at(const AgentConfig& cfg, std::uint64_t step) {
  if (cfg.eps_decay_steps == 0 || step >= cfg.eps_decay_steps) return cfg.eps_end;
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.eps_decay_steps);
  return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
}

EvalResult evaluate(const net::Network& net, envs::Environment& env, std::size_t episodes, double epsilon,
                    RngStream& rng) {
  EvalResult res;
  res.returns.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    auto obs = env.reset();
    double ret = 0.0;
    for (;;) {
      const auto r = env.step(select_action(net, obs, epsilon, rng));
      ret += r.reward;
      if (r.done()) break;
      obs = r.obs;
    }
    res.returns.push_back(ret);
  }
  double sum = 0.0;
  for (double r : res.returns) sum += r;
  res.mean_return = episodes ? sum / static_cast<double>(episodes) : 0.0;
  return res;
}

}  // namespace prl::agents
