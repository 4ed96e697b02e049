#include "prl/replay/n_step.hpp"

#include <stdexcept>

namespace prl::replay {

Transition n_step_assemble(std::span<const Transition> window, std::size_t n, double gamma) {
  if (window.empty()) throw std::invalid_argument("n_step_assemble: empty window");
  if (n == 0) throw std::invalid_argument("n_step_assemble: n must be >= 1");
  Transition out;
  out.obs = window[0].obs;
  out.action = window[0].action;
  double discount = 1.0;
  double ret = 0.0;
  std::size_t m = 0;
  while (m < n && m < window.size()) {
    ret += discount * window[m].reward;
    discount *= gamma;
    ++m;
    if (window[m - 1].done) break;
  }
  out.reward = ret;
  out.next_obs = window[m - 1].next_obs;
  out.done = window[m - 1].done;
  out.horizon = static_cast<std::uint32_t>(m);
  return out;
}

NStepAccumulator::NStepAccumulator(std::size_t n, double gamma) : n_(n), gamma_(gamma) {
  if (n == 0) throw std::invalid_argument("NStepAccumulator: n must be >= 1");
}

std::vector<Transition> NStepAccumulator::push(Transition step) {
  const bool terminal = step.done;
  window_.push_back(std::move(step));
  std::vector<Transition> ready;
  if (terminal) {
    ready = flush();
  } else if (window_.size() == n_) {
    std::vector<Transition> w(window_.begin(), window_.end());
    ready.push_back(n_step_assemble(w, n_, gamma_));
    window_.pop_front();
  }
  return ready;
}

std::vector<Transition> NStepAccumulator::flush() {
  std::vector<Transition> ready;
  std::vector<Transition> w(window_.begin(), window_.end());
  for (std::size_t start = 0; start < w.size(); ++start) {
    ready.push_back(n_step_assemble(std::span<const Transition>(w).subspan(start), n_, gamma_));
  }
  window_.clear();
  return ready;
}

}  // namespace prl::replay
