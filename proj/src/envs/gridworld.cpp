#include "prl/envs/gridworld.hpp"

#include <algorithm>

namespace prl::envs {

namespace {

char tile(std::size_t cell) {
  return GridWorld::kLayout[cell / GridWorld::kSize][cell % GridWorld::kSize];
}

std::size_t move(std::size_t cell, std::size_t dir) {
  const std::size_t r = cell / GridWorld::kSize;
  const std::size_t c = cell % GridWorld::kSize;
  switch (dir) {
    case GridWorld::up: return r > 0 ? cell - GridWorld::kSize : cell;
    case GridWorld::right: return c + 1 < GridWorld::kSize ? cell + 1 : cell;
    case GridWorld::down: return r + 1 < GridWorld::kSize ? cell + GridWorld::kSize : cell;
    default: return c > 0 ? cell - 1 : cell;
  }
}

}  // namespace

GridWorld::GridWorld(RngStream rng) : rng_(rng) {}

std::size_t GridWorld::start_cell() {
  for (std::size_t i = 0; i < kSize * kSize; ++i)
    if (tile(i) == 'S') return i;
  return 0;
}

bool GridWorld::is_goal(std::size_t cell) { return tile(cell) == 'G'; }
bool GridWorld::is_pit(std::size_t cell) { return tile(cell) == 'X'; }

double GridWorld::reward_of(std::size_t cell) {
  return is_goal(cell) ? 1.0 : is_pit(cell) ? -1.0 : 0.0;
}

std::vector<std::pair<std::size_t, double>> GridWorld::transitions(std::size_t cell, std::size_t action) {
  const std::size_t cw = (action + 1) % 4;
  const std::size_t ccw = (action + 3) % 4;
  return {{move(cell, action), 1.0 - kSlip}, {move(cell, cw), kSlip / 2}, {move(cell, ccw), kSlip / 2}};
}

double GridWorld::optimal_return(std::size_t horizon) {
  constexpr std::size_t n = kSize * kSize;
  std::vector<double> value(n, 0.0), next(n, 0.0);
  for (std::size_t h = 0; h < horizon; ++h) {
    for (std::size_t s = 0; s < n; ++s) {
      if (is_terminal(s)) {
        next[s] = 0.0;
        continue;
      }
      double best = -1e300;
      for (std::size_t a = 0; a < 4; ++a) {
        double q = 0.0;
        for (const auto& [s2, p] : transitions(s, a)) q += p * (reward_of(s2) + value[s2]);
        best = std::max(best, q);
      }
      next[s] = best;
    }
    std::swap(value, next);
  }
  return value[start_cell()];
}

std::vector<double> GridWorld::reset() {
  cell_ = start_cell();
  steps_ = 0;
  std::vector<double> obs(kSize * kSize, 0.0);
  obs[cell_] = 1.0;
  return obs;
}

StepResult GridWorld::step(std::size_t action) {
  check_action(action);
  const double u = rng_.uniform();
  std::size_t dir = action;
  if (u < kSlip / 2) dir = (action + 1) % 4;
  else if (u < kSlip) dir = (action + 3) % 4;
  cell_ = move(cell_, dir);
  ++steps_;

  StepResult r;
  r.obs.assign(kSize * kSize, 0.0);
  r.obs[cell_] = 1.0;
  r.reward = reward_of(cell_);
  r.terminated = is_terminal(cell_);
  r.truncated = !r.terminated && steps_ >= kMaxSteps;
  return r;
}

}  // namespace prl::envs
