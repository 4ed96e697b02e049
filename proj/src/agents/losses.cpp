#include "prl/agents/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prl/agents/acting.hpp"

namespace prl::agents {

namespace {

double weight_of(std::span<const double> weights, std::size_t i) {
  return weights.empty() ? 1.0 : weights[i];
}

double bootstrap_discount(const replay::Transition& t, double gamma) {
  return t.done ? 0.0 : std::pow(gamma, static_cast<double>(t.horizon));
}

// Adds cql_alpha * d(mean penalty)/dQ to `dq` (batch x actions) and returns
// the mean penalty.
double add_scalar_penalty(const Matrix& q, std::span<const replay::Transition> batch, double alpha, Matrix& dq) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = q.row(i);
    total += cql_penalty(row, batch[i].action);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    for (std::size_t a = 0; a < row.size(); ++a) {
      const double soft = std::exp(row[a] - mx) / z;
      dq(i, a) += alpha * inv_b * (soft - (a == batch[i].action ? 1.0 : 0.0));
    }
  }
  return total * inv_b;
}

}  // namespace

Matrix stack_observations(std::span<const replay::Transition> batch, bool next) {
  if (batch.empty()) return {};
  const std::size_t dim = next ? batch[0].next_obs.size() : batch[0].obs.size();
  Matrix m(batch.size(), dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& v = next ? batch[i].next_obs : batch[i].obs;
    if (v.size() != dim) throw std::invalid_argument("stack_observations: ragged batch");
    std::copy(v.begin(), v.end(), m.row(i).begin());
  }
  return m;
}

LossResult dqn_td_loss(const net::Network& online, const net::Network& target,
                       std::span<const replay::Transition> batch, double gamma, std::span<const double> weights,
                       LossKind kind) {
  if (online.spec.head.is_categorical()) throw std::invalid_argument("dqn_td_loss: needs a scalar head");
  const std::size_t b = batch.size();
  auto cur = net::forward_batch(online, stack_observations(batch, false), true);
  const Matrix next_q = net::forward_batch(target, stack_observations(batch, true), false).output;

  LossResult res;
  res.td.resize(b);
  res.targets.resize(b);
  Matrix dout(b, online.output_dim());
  const double inv_b = 1.0 / static_cast<double>(b);
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const auto& t = batch[i];
    const auto nq = next_q.row(i);
    const double boot = *std::max_element(nq.begin(), nq.end());
    const double y = t.reward + bootstrap_discount(t, gamma) * boot;
    if (!std::isfinite(y)) throw std::domain_error("dqn_td_loss: non-finite TD target");
    const double q = cur.output(i, t.action);
    const double delta = y - q;
    const double w = weight_of(weights, i);
    res.td[i] = delta;
    res.targets[i] = y;
    if (kind == LossKind::mse) {
      loss += w * delta * delta;
      dout(i, t.action) = -2.0 * w * delta * inv_b;
    } else {
      const double ad = std::abs(delta);
      loss += w * (ad <= 1.0 ? 0.5 * delta * delta : ad - 0.5);
      dout(i, t.action) = -w * std::clamp(delta, -1.0, 1.0) * inv_b;
    }
  }
  res.base_loss = loss * inv_b;
  res.loss = res.base_loss;
  res.grads = net::backward(online, cur.cache, dout);
  return res;
}

std::vector<double> c51_project(std::span<const double> next_dist, double reward, double discount,
                                std::span<const double> support) {
  const std::size_t k = support.size();
  if (k < 2 || !(support.front() < support.back())) {
    throw std::invalid_argument("c51_project: support needs >= 2 atoms with v_min < v_max");
  }
  if (next_dist.size() != k) throw std::invalid_argument("c51_project: distribution/support size mismatch");
  const double v_min = support.front();
  const double v_max = support.back();
  const double dz = (v_max - v_min) / static_cast<double>(k - 1);
  std::vector<double> out(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double tz = std::clamp(reward + discount * support[j], v_min, v_max);
    const double pos = (tz - v_min) / dz;
    auto lo = static_cast<std::size_t>(std::floor(pos));
    lo = std::min(lo, k - 1);
    const std::size_t hi = std::min(lo + 1, k - 1);
    const double frac = pos - static_cast<double>(lo);
    if (hi == lo || frac <= 0.0) {
      out[lo] += next_dist[j];
    } else {
      out[lo] += next_dist[j] * (1.0 - frac);
      out[hi] += next_dist[j] * frac;
    }
  }
  return out;
}

namespace {

LossResult c51_impl(const net::Network& online, const net::Network& target, std::span<const replay::Transition> batch,
                    double gamma, std::span<const double> weights, double cql_alpha) {
  const auto& head = online.spec.head;
  if (!head.is_categorical()) throw std::invalid_argument("c51_loss: needs a categorical head");
  const std::size_t b = batch.size();
  const std::size_t k = head.num_atoms;
  const std::size_t n_actions = online.spec.n_actions;
  const auto support = head.support();

  auto cur = net::forward_batch(online, stack_observations(batch, false), true);
  const Matrix next_logits = net::forward_batch(target, stack_observations(batch, true), false).output;

  LossResult res;
  res.td.resize(b);
  res.targets.resize(b);
  Matrix dout(b, online.output_dim());
  const double inv_b = 1.0 / static_cast<double>(b);
  std::vector<double> next_probs(n_actions * k), probs(n_actions * k);
  double loss = 0.0;
  double penalty = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const auto& t = batch[i];
    net::softmax_atoms(next_logits.row(i), k, next_probs);
    const auto next_q = net::expected_values(next_probs, support);
    const std::size_t a_star = greedy_action(next_q);
    const auto m = c51_project(std::span<const double>(next_probs).subspan(a_star * k, k), t.reward,
                               bootstrap_discount(t, gamma), support);
    double y = 0.0;
    for (std::size_t j = 0; j < k; ++j) y += m[j] * support[j];
    if (!std::isfinite(y)) throw std::domain_error("c51_loss: non-finite target distribution");

    const auto logits = cur.output.row(i);
    net::softmax_atoms(logits, k, probs);
    const std::size_t off = t.action * k;
    // Log-softmax computed directly from logits for stability.
    double mx = logits[off];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits[off + j]);
    double lse = 0.0;
    for (std::size_t j = 0; j < k; ++j) lse += std::exp(logits[off + j] - mx);
    lse = mx + std::log(lse);
    double ce = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      if (m[j] > 0.0) ce -= m[j] * (logits[off + j] - lse);

    const double w = weight_of(weights, i);
    res.td[i] = ce;
    res.targets[i] = y;
    loss += w * ce;
    for (std::size_t j = 0; j < k; ++j) dout(i, off + j) = w * inv_b * (probs[off + j] - m[j]);

    const auto q = net::expected_values(probs, support);
    penalty += cql_penalty(q, t.action);
    if (cql_alpha != 0.0) {
      const double mq = *std::max_element(q.begin(), q.end());
      double z = 0.0;
      for (double v : q) z += std::exp(v - mq);
      for (std::size_t a = 0; a < n_actions; ++a) {
        const double dq = cql_alpha * inv_b * (std::exp(q[a] - mq) / z - (a == t.action ? 1.0 : 0.0));
        for (std::size_t j = 0; j < k; ++j) dout(i, a * k + j) += dq * probs[a * k + j] * (support[j] - q[a]);
      }
    }
  }
  res.base_loss = loss * inv_b;
  res.penalty = penalty * inv_b;
  res.loss = res.base_loss + cql_alpha * res.penalty;
  res.grads = net::backward(online, cur.cache, dout);
  return res;
}

}  // namespace

LossResult c51_loss(const net::Network& online, const net::Network& target, std::span<const replay::Transition> batch,
                    double gamma, std::span<const double> weights) {
  return c51_impl(online, target, batch, gamma, weights, 0.0);
}

double cql_penalty(std::span<const double> q, std::size_t action) {
  const double mx = *std::max_element(q.begin(), q.end());
  double z = 0.0;
  for (double v : q) z += std::exp(v - mx);
  return mx + std::log(z) - q[action];
}

LossResult cql_loss(const net::Network& online, const net::Network& target, std::span<const replay::Transition> batch,
                    const AgentConfig& cfg) {
  if (online.spec.head.is_categorical()) return c51_impl(online, target, batch, cfg.gamma, {}, cfg.cql_alpha);

  const std::size_t b = batch.size();
  auto cur = net::forward_batch(online, stack_observations(batch, false), true);
  const Matrix next_q = net::forward_batch(target, stack_observations(batch, true), false).output;
  LossResult res;
  res.td.resize(b);
  res.targets.resize(b);
  Matrix dout(b, online.output_dim());
  const double inv_b = 1.0 / static_cast<double>(b);
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const auto& t = batch[i];
    const auto nq = next_q.row(i);
    const double y = t.reward + bootstrap_discount(t, cfg.gamma) * *std::max_element(nq.begin(), nq.end());
    if (!std::isfinite(y)) throw std::domain_error("cql_loss: non-finite TD target");
    const double delta = y - cur.output(i, t.action);
    res.td[i] = delta;
    res.targets[i] = y;
    if (cfg.loss == LossKind::mse) {
      loss += delta * delta;
      dout(i, t.action) = -2.0 * delta * inv_b;
    } else {
      const double ad = std::abs(delta);
      loss += ad <= 1.0 ? 0.5 * delta * delta : ad - 0.5;
      dout(i, t.action) = -std::clamp(delta, -1.0, 1.0) * inv_b;
    }
  }
  res.base_loss = loss * inv_b;
  if (cfg.cql_alpha != 0.0) {
    res.penalty = add_scalar_penalty(cur.output, batch, cfg.cql_alpha, dout);
  } else {
    double pen = 0.0;
    for (std::size_t i = 0; i < b; ++i) pen += cql_penalty(cur.output.row(i), batch[i].action);
    res.penalty = pen * inv_b;
  }
  res.loss = res.base_loss + cfg.cql_alpha * res.penalty;
  res.grads = net::backward(online, cur.cache, dout);
  return res;
}

LossResult agent_loss(const net::Network& online, const net::Network& target, std::span<const replay::Transition> batch,
                      const AgentConfig& cfg, std::span<const double> weights) {
  switch (cfg.kind) {
    case AgentKind::dqn: return dqn_td_loss(online, target, batch, cfg.gamma, weights, cfg.loss);
    case AgentKind::rainbow_lite: return c51_loss(online, target, batch, cfg.gamma, weights);
    case AgentKind::cql:
    case AgentKind::cql_c51: return cql_loss(online, target, batch, cfg);
  }
  throw std::logic_error("agent_loss: unknown agent");
}

}  // namespace prl::agents
