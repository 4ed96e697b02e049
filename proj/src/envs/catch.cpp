#include "prl/envs/catch.hpp"

namespace prl::envs {

Catch::Catch(RngStream rng) : rng_(rng) {}

std::vector<double> Catch::observe() const {
  std::vector<double> obs(kRows * kCols, 0.0);
  obs[ball_row_ * kCols + ball_col_] = 1.0;
  obs[(kRows - 1) * kCols + paddle_col_] = 1.0;
  return obs;
}

std::vector<double> Catch::reset() {
  ball_row_ = 0;
  ball_col_ = static_cast<std::size_t>(rng_.uniform_index(kCols));
  paddle_col_ = kCols / 2;
  steps_ = 0;
  return observe();
}

StepResult Catch::step(std::size_t action) {
  check_action(action);
  if (action == 0 && paddle_col_ > 0) --paddle_col_;
  if (action == 2 && paddle_col_ + 1 < kCols) ++paddle_col_;
  ++ball_row_;
  ++steps_;

  StepResult r;
  r.obs = observe();
  if (ball_row_ == kRows - 1) {
    r.reward = paddle_col_ == ball_col_ ? 1.0 : -1.0;
    r.terminated = true;
  }
  return r;
}

}  // namespace prl::envs
