#include "prl/envs/cartpole.hpp"

#include <cmath>

namespace prl::envs {

CartPole::CartPole(RngStream rng) : rng_(rng) {}

std::vector<double> CartPole::reset() {
  for (double& s : state_) s = rng_.uniform(-0.05, 0.05);
  steps_ = 0;
  return {state_.begin(), state_.end()};
}

StepResult CartPole::step(std::size_t action) {
  check_action(action);
  constexpr double total_mass = kCartMass + kPoleMass;
  constexpr double pole_mass_length = kPoleMass * kHalfLength;

  auto [x, x_dot, theta, theta_dot] = state_;
  const double force = action == 1 ? kForce : -kForce;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + pole_mass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) / (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  x += kDt * x_dot;
  x_dot += kDt * x_acc;
  theta += kDt * theta_dot;
  theta_dot += kDt * theta_acc;
  state_ = {x, x_dot, theta, theta_dot};
  ++steps_;

  StepResult r;
  r.obs.assign(state_.begin(), state_.end());
  r.reward = 1.0;
  r.terminated = x < -kXLimit || x > kXLimit || theta < -kThetaLimit || theta > kThetaLimit;
  r.truncated = !r.terminated && steps_ >= kMaxSteps;
  return r;
}

}  // namespace prl::envs
