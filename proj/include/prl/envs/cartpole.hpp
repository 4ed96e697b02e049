#pragma once

#include <array>

#include "prl/envs/environment.hpp"

namespace prl::envs {

/// Classic cart-pole balancing with explicit Euler integration.
/// Observation (x, x_dot, theta, theta_dot); actions push left / right.
class CartPole final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kXLimit = 2.4;
  static constexpr double kThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr std::size_t kMaxSteps = 500;

  explicit CartPole(RngStream rng);

  std::string id() const override { return "cartpole"; }
  std::size_t observation_dim() const override { return 4; }
  std::size_t num_actions() const override { return 2; }
  std::size_t max_episode_steps() const override { return kMaxSteps; }

  std::vector<double> reset() override;
  StepResult step(std::size_t action) override;

  const std::array<double, 4>& state() const { return state_; }
  void set_state(const std::array<double, 4>& s) { state_ = s; }

 private:
  RngStream rng_;
  std::array<double, 4> state_{};
};

}  // namespace prl::envs
