#pragma once

#include "prl/envs/environment.hpp"

namespace prl::envs {

/// Catch: a ball falls one row per step down a 10x10 board; the paddle on
/// the bottom row moves left / stays / moves right. +1 for a catch, -1 for
/// a miss, 0 otherwise. Observation is the flattened binary board.
class Catch final : public Environment {
 public:
  static constexpr std::size_t kRows = 10;
  static constexpr std::size_t kCols = 10;

  explicit Catch(RngStream rng);

  std::string id() const override { return "catch"; }
  std::size_t observation_dim() const override { return kRows * kCols; }
  std::size_t num_actions() const override { return 3; }
  std::size_t max_episode_steps() const override { return kRows - 1; }

  std::vector<double> reset() override;
  StepResult step(std::size_t action) override;

  std::size_t ball_row() const { return ball_row_; }
  std::size_t ball_col() const { return ball_col_; }
  std::size_t paddle_col() const { return paddle_col_; }

 private:
  std::vector<double> observe() const;

  RngStream rng_;
  std::size_t ball_row_ = 0;
  std::size_t ball_col_ = 0;
  std::size_t paddle_col_ = kCols / 2;
};

}  // namespace prl::envs
