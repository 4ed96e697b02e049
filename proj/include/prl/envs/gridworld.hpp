#pragma once

#include <array>
#include <string_view>
#include <utility>
#include <vector>

#include "prl/envs/environment.hpp"

namespace prl::envs {

/// 8x8 navigation with slippery moves. Entering the goal gives +1 and
/// entering a pit -1, both terminal; other steps cost nothing. With
/// probability `kSlip` the move goes to one of the two perpendicular
/// directions instead. Observation is a one-hot cell index.
class GridWorld final : public Environment {
 public:
  static constexpr std::size_t kSize = 8;
  static constexpr double kSlip = 0.1;
  static constexpr std::size_t kMaxSteps = 100;
  // 'S' start, 'G' goal, 'X' pit.
  static constexpr std::array<std::string_view, kSize> kLayout = {
      "S.......",
      "........",
      "...X....",
      "........",
      ".....X..",
      "..X.....",
      "......X.",
      ".......G",
  };

  enum Action : std::size_t { up = 0, right = 1, down = 2, left = 3 };

  explicit GridWorld(RngStream rng);

  std::string id() const override { return "gridworld"; }
  std::size_t observation_dim() const override { return kSize * kSize; }
  std::size_t num_actions() const override { return 4; }
  std::size_t max_episode_steps() const override { return kMaxSteps; }

  std::vector<double> reset() override;
  StepResult step(std::size_t action) override;

  std::size_t cell() const { return cell_; }
  static std::size_t start_cell();
  static bool is_goal(std::size_t cell);
  static bool is_pit(std::size_t cell);
  static bool is_terminal(std::size_t cell) { return is_goal(cell) || is_pit(cell); }
  /// Reward for entering `cell`.
  static double reward_of(std::size_t cell);

  /// Successor distribution of (cell, action) as (next cell, probability).
  static std::vector<std::pair<std::size_t, double>> transitions(std::size_t cell, std::size_t action);

  /// Optimal expected undiscounted return from the start cell within
  /// `horizon` steps, by finite-horizon value iteration.
  static double optimal_return(std::size_t horizon = kMaxSteps);

 private:
  RngStream rng_;
  std::size_t cell_ = 0;
};

}  // namespace prl::envs
