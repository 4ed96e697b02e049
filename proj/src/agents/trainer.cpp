#include "prl/agents/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "prl/agents/acting.hpp"
#include "prl/agents/losses.hpp"
#include "prl/envs/environment.hpp"
#include "prl/net/adam.hpp"
#include "prl/prune/magnitude.hpp"
#include "prl/replay/n_step.hpp"
#include "prl/replay/replay_buffer.hpp"

namespace prl::agents {

namespace {

enum Stream : std::uint64_t { env_stream = 1, eval_env_stream, act_stream, replay_stream, init_stream,
                              intervention_stream, eval_act_stream, probe_stream };

Matrix q_values_of(const net::Network& net, const Matrix& output) {
  if (!net.spec.head.is_categorical()) return output;
  const std::size_t k = net.spec.head.num_atoms;
  const auto support = net.spec.head.support();
  Matrix q(output.rows(), net.spec.n_actions);
  std::vector<double> probs(output.cols());
  for (std::size_t i = 0; i < output.rows(); ++i) {
    net::softmax_atoms(output.row(i), k, probs);
    const auto ev = net::expected_values(probs, support);
    std::copy(ev.begin(), ev.end(), q.row(i).begin());
  }
  return q;
}

class Learner {
 public:
  Learner(const RunSpec& spec, std::uint64_t total_grad_steps, const RngStream& root)
      : spec_(spec),
        cfg_(spec.agent),
        init_rng_(root.split(init_stream)),
        iv_rng_(root.split(intervention_stream)),
        probe_rng_(root.split(probe_stream)) {
    online_ = net::build_network(net_spec_for(spec), init_rng_);
    target_ = online_;
    opt_ = net::AdamState::zeros_like(online_.params);
    pruning_ = spec.final_sparsity > 0.0 && total_grad_steps > 0;
    if (pruning_) schedule_ = schedule_for(spec, total_grad_steps);
    intervention_period_ = spec.intervention.effective_period(total_grad_steps);
  }

  const net::Network& online() const { return online_; }
  std::uint64_t grad_steps() const { return step_; }

  /// One gradient step. Returns the per-item TD values.
  std::vector<double> update(const std::vector<replay::Transition>& batch, std::span<const double> weights) {
    auto res = agent_loss(online_, target_, batch, cfg_, weights);
    if (!std::isfinite(res.loss)) throw std::domain_error("non-finite loss at gradient step " + std::to_string(step_ + 1));
    if (spec_.intervention.kind == interventions::Kind::weight_decay) {
      interventions::apply_weight_decay(res.grads, online_.params, spec_.intervention.weight_decay);
    }
    net::adam_step(online_.params, res.grads, opt_, cfg_.adam);
    if (spec_.intervention.kind == interventions::Kind::l2_unit) interventions::apply_l2_unit(online_.params);
    online_.params.apply_masks();
    ++step_;
    if (pruning_) prune::prune_step(online_.params, schedule_, step_);
    periodic_intervention();
    if (step_ % cfg_.target_sync_period == 0) target_ = online_;

    loss_sum_ += res.loss;
    ++loss_count_;
    if (res.targets.size() >= 2) qvar_.add_batch(res.targets);
    return std::move(res.td);
  }

  void set_probe(const replay::ReplayBuffer& buf) {
    if (!probe_.empty() || buf.size() == 0) return;
    const std::size_t n = std::min(spec_.probe_size, buf.size());
    probe_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) probe_.push_back(buf.at(probe_rng_.uniform_index(buf.size())));
    probe_obs_ = stack_observations(probe_, false);
  }

  diagnostics::MetricRecord record(std::uint64_t step, double eval_return) {
    diagnostics::MetricRecord r;
    r.step = step;
    r.episode_return = eval_return;
    r.normalized_return = envs::human_normalized_score(spec_.env_id, eval_return);
    r.sparsity = online_.params.sparsity();
    r.q_variance = qvar_.batches() ? qvar_.mean() : 0.0;
    r.params_norm = diagnostics::params_norm(online_.params);
    r.loss = loss_count_ ? loss_sum_ / static_cast<double>(loss_count_) : 0.0;
    if (!probe_.empty()) {
      const auto out = net::forward_batch(online_, probe_obs_, true);
      r.q_norm = diagnostics::q_norm(q_values_of(online_, out.output));
      r.srank = static_cast<double>(diagnostics::srank(out.cache.penultimate(), spec_.srank_delta));
      r.dormant_fraction =
          diagnostics::dormant_fraction(diagnostics::mean_abs_activations(out.cache), spec_.dormant_tau).fraction;
    }
    qvar_.reset();
    loss_sum_ = 0.0;
    loss_count_ = 0;
    return r;
  }

  std::optional<CovarianceSnapshot> covariance(std::uint64_t step) const {
    const std::size_t m = std::min(spec_.covariance_probe, probe_.size());
    if (m == 0) return std::nullopt;
    auto grad_of = [&](std::size_t i) {
      return agent_loss(online_, target_, std::span<const replay::Transition>(&probe_[i], 1), cfg_).grads;
    };
    return CovarianceSnapshot{step, diagnostics::gradient_covariance(online_.params, grad_of, m)};
  }

 private:
  void periodic_intervention() {
    const auto& iv = spec_.intervention;
    if (iv.kind != interventions::Kind::reset && iv.kind != interventions::Kind::redo) return;
    if (step_ % intervention_period_ != 0) return;
    if (iv.kind == interventions::Kind::reset) {
      interventions::reset_last_layers(online_, opt_, iv_rng_);
    } else if (!probe_.empty()) {
      const auto out = net::forward_batch(online_, probe_obs_, true);
      interventions::redo(online_, opt_, diagnostics::mean_abs_activations(out.cache), iv.redo_threshold, iv_rng_);
    }
    if (iv.kind != interventions::Kind::reset) online_.params.apply_masks();
  }

  const RunSpec& spec_;
  const AgentConfig& cfg_;
  RngStream init_rng_;
  RngStream iv_rng_;
  RngStream probe_rng_;
  net::Network online_;
  net::Network target_;
  net::AdamState opt_;
  bool pruning_ = false;
  prune::PruneSchedule schedule_;
  std::uint64_t step_ = 0;
  std::uint64_t intervention_period_ = 1000;
  std::vector<replay::Transition> probe_;
  Matrix probe_obs_;
  diagnostics::QVarianceWindow qvar_;
  double loss_sum_ = 0.0;
  std::size_t loss_count_ = 0;
};

RunResult fail(RunResult res, const std::string& what, std::uint64_t step) {
  res.ok = false;
  res.error = what;
  diagnostics::MetricRecord r;
  r.step = step;
  r.loss = std::numeric_limits<double>::quiet_NaN();
  res.records.push_back(r);
  return res;
}

}  // namespace

void RunSpec::validate() const {
  agent.validate();
  intervention.validate();
  if (width_multiplier < 1 || width_multiplier > 8) throw std::invalid_argument("run: width multiplier must be in 1..8");
  if (!(final_sparsity >= 0.0 && final_sparsity <= 1.0)) throw std::invalid_argument("run: final sparsity must be in [0, 1]");
  if (!(prune_start_frac >= 0.0 && prune_start_frac < prune_end_frac && prune_end_frac <= 1.0)) {
    throw std::invalid_argument("run: need 0 <= prune start < prune end <= 1");
  }
  if (prune_interval < 1) throw std::invalid_argument("run: prune interval must be >= 1");
  if (log_interval < 1) throw std::invalid_argument("run: log interval must be >= 1");
  if (!agent.offline() && total_env_steps <= agent.min_replay_history) {
    throw std::invalid_argument("run: total env steps must exceed the replay warm-up");
  }
  if (agent.target_sync_period < 1) throw std::invalid_argument("run: target sync period must be >= 1");
  if (covariance_probe > 64) throw std::invalid_argument("run: covariance probe must be <= 64");
  if (!(srank_delta > 0.0 && srank_delta < 1.0)) throw std::invalid_argument("run: srank delta must be in (0, 1)");
}

std::uint64_t planned_grad_steps(const RunSpec& spec) {
  if (spec.total_env_steps <= spec.agent.min_replay_history) return 0;
  return static_cast<std::uint64_t>(
      std::floor(spec.agent.replay_ratio * static_cast<double>(spec.total_env_steps - spec.agent.min_replay_history)));
}

prune::PruneSchedule schedule_for(const RunSpec& spec, std::uint64_t total_grad_steps) {
  auto s = prune::PruneSchedule::from_fractions(spec.final_sparsity, total_grad_steps, spec.prune_start_frac,
                                                spec.prune_end_frac, spec.prune_interval);
  s.scope = spec.prune_scope;
  s.prune_head = spec.prune_head;
  return s;
}

net::NetSpec net_spec_for(const RunSpec& spec) {
  auto env = envs::make_environment(spec.env_id, RngStream(0, 0));
  net::NetSpec ns;
  ns.arch = spec.arch;
  ns.width_multiplier = spec.width_multiplier;
  ns.in_dim = env->observation_dim();
  ns.n_actions = env->num_actions();
  if (spec.agent.categorical()) {
    double lo = spec.agent.v_min;
    double hi = spec.agent.v_max;
    if (spec.scale_support) {
      hi = envs::return_scale(spec.env_id, spec.agent.gamma);
      lo = -hi;
    }
    ns.head = net::Head::categorical(spec.agent.num_atoms, lo, hi);
  }
  return ns;
}

RunResult train_online(const RunSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.agent.offline()) throw std::invalid_argument("train_online: offline agent needs a dataset");
  RunSpec run = spec;
  if (run.eps_decay_frac > 0.0) {
    run.agent.eps_decay_steps = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(run.eps_decay_frac * static_cast<double>(run.total_env_steps)));
  }
  const RngStream root(seed, 0);
  auto env = envs::make_environment(run.env_id, root.split(env_stream));
  auto eval_env = envs::make_environment(run.env_id, root.split(eval_env_stream));
  RngStream act_rng = root.split(act_stream);
  RngStream replay_rng = root.split(replay_stream);
  RngStream eval_rng = root.split(eval_act_stream);

  Learner learner(run, planned_grad_steps(run), root);
  replay::ReplayBuffer buffer(run.agent.replay);
  replay::NStepAccumulator nstep(run.agent.n_step, run.agent.gamma);
  RunResult res;

  auto obs = env->reset();
  double accum = 0.0;
  const std::uint64_t total = run.total_env_steps;
  std::uint64_t t = 0;
  try {
    for (t = 1; t <= total; ++t) {
      const auto action = select_action(learner.online(), obs, epsilon_at(run.agent, t - 1), act_rng);
      auto sr = env->step(action);
      replay::Transition tr{obs, static_cast<std::uint32_t>(action), sr.reward, sr.obs, sr.terminated, 1};
      for (auto& ready : nstep.push(std::move(tr))) buffer.push(std::move(ready));
      if (sr.done()) {
        for (auto& ready : nstep.flush()) buffer.push(std::move(ready));
        obs = env->reset();
      } else {
        obs = std::move(sr.obs);
      }

      if (t > run.agent.min_replay_history && buffer.size() >= run.agent.batch_size) {
        learner.set_probe(buffer);
        accum += run.agent.replay_ratio;
        while (accum >= 1.0) {
          accum -= 1.0;
          auto batch = buffer.sample(run.agent.batch_size, replay_rng);
          const auto td = learner.update(batch.items, buffer.prioritized() ? std::span<const double>(batch.weights)
                                                                           : std::span<const double>());
          if (buffer.prioritized()) buffer.update_priorities(batch.indices, td);
        }
      }

      if (t % run.log_interval == 0 || t == total) {
        learner.set_probe(buffer);
        const std::size_t episodes = t == total ? run.final_eval_episodes : run.eval_episodes;
        const auto ev = evaluate(learner.online(), *eval_env, episodes, run.eval_epsilon, eval_rng);
        res.records.push_back(learner.record(t, ev.mean_return));
        res.best_return = res.records.size() == 1 ? ev.mean_return : std::max(res.best_return, ev.mean_return);
        if (auto cov = learner.covariance(t)) res.covariances.push_back(std::move(*cov));
        if (t == total) res.final_return = ev.mean_return;
      }
    }
  } catch (const std::domain_error& e) {
    res.env_steps = t;
    res.grad_steps = learner.grad_steps();
    res.network = learner.online();
    return fail(std::move(res), e.what(), t);
  }
  res.env_steps = total;
  res.grad_steps = learner.grad_steps();
  res.final_normalized = envs::human_normalized_score(run.env_id, res.final_return);
  res.realized_sparsity = learner.online().params.sparsity();
  res.network = learner.online();
  return res;
}

RunResult train_offline(const RunSpec& spec, const std::vector<replay::Transition>& dataset, std::uint64_t seed) {
  spec.validate();
  if (dataset.size() < spec.agent.batch_size) throw std::invalid_argument("train_offline: dataset smaller than a batch");
  const RngStream root(seed, 0);
  auto eval_env = envs::make_environment(spec.env_id, root.split(eval_env_stream));
  RngStream replay_rng = root.split(replay_stream);
  RngStream eval_rng = root.split(eval_act_stream);

  replay::ReplayConfig rc;
  rc.capacity = dataset.size();
  rc.prioritized = false;
  replay::ReplayBuffer buffer(rc);
  for (const auto& tr : dataset) buffer.push(tr);

  const std::uint64_t total = spec.total_grad_steps;
  Learner learner(spec, total, root);
  learner.set_probe(buffer);
  RunResult res;
  std::uint64_t g = 0;
  try {
    for (g = 1; g <= total; ++g) {
      auto batch = buffer.sample(spec.agent.batch_size, replay_rng);
      learner.update(batch.items, {});
      if (g % spec.log_interval == 0 || g == total) {
        const std::size_t episodes = g == total ? spec.final_eval_episodes : spec.eval_episodes;
        const auto ev = evaluate(learner.online(), *eval_env, episodes, spec.eval_epsilon, eval_rng);
        res.records.push_back(learner.record(g, ev.mean_return));
        res.best_return = res.records.size() == 1 ? ev.mean_return : std::max(res.best_return, ev.mean_return);
        if (auto cov = learner.covariance(g)) res.covariances.push_back(std::move(*cov));
        if (g == total) res.final_return = ev.mean_return;
      }
    }
  } catch (const std::domain_error& e) {
    res.grad_steps = learner.grad_steps();
    res.network = learner.online();
    return fail(std::move(res), e.what(), g);
  }
  res.grad_steps = total;
  res.final_normalized = envs::human_normalized_score(spec.env_id, res.final_return);
  res.realized_sparsity = learner.online().params.sparsity();
  res.network = learner.online();
  return res;
}

}  // namespace prl::agents
