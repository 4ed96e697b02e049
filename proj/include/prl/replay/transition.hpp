#pragma once

#include <cstdint>
#include <vector>

namespace prl::replay {

/// (x, a, r, x', done). After n-step assembly `reward` holds the discounted
/// reward sum over `horizon` steps and `next_obs` the observation `horizon`
/// steps later. `done` means a true terminal state: no bootstrap.
struct Transition {
  std::vector<double> obs;
  std::uint32_t action = 0;
  double reward = 0.0;
  std::vector<double> next_obs;
  bool done = false;
  std::uint32_t horizon = 1;

  friend bool operator==(const Transition&, const Transition&) = default;
};

}  // namespace prl::replay
