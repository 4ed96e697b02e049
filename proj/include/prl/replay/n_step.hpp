#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "prl/replay/transition.hpp"

namespace prl::replay {

/// Folds the leading one-step transitions of `window` into one n-step
/// transition: R = sum_{k<m} gamma^k r_k with m = min(n, |window|, steps to
/// termination). A terminal inside the window ends the sum and disables
/// the bootstrap. Throws std::invalid_argument on an empty window or n == 0.
Transition n_step_assemble(std::span<const Transition> window, std::size_t n, double gamma);

/// Turns a stream of one-step transitions from a single episode into
/// n-step transitions as soon as each becomes available.
class NStepAccumulator {
 public:
  NStepAccumulator(std::size_t n, double gamma);

  /// Adds one step; returns the transitions completed by it. A terminal
  /// step flushes the whole window.
  std::vector<Transition> push(Transition step);

  /// Episode cut short without a terminal state (time limit): emits the
  /// pending transitions with shortened, still bootstrapped horizons.
  std::vector<Transition> flush();

  std::size_t pending() const { return window_.size(); }

 private:
  std::size_t n_;
  double gamma_;
  std::deque<Transition> window_;
};

}  // namespace prl::replay
