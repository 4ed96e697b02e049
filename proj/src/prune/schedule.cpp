#include "prl/prune/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace prl::prune {

Scope parse_scope(const std::string& s) {
  if (s == "per-layer" || s == "per_layer") return Scope::per_layer;
  if (s == "global") return Scope::global;
  throw std::invalid_argument("unknown prune scope '" + s + "' (expected per-layer|global)");
}

std::string to_string(Scope s) {
  return s == Scope::per_layer ? "per-layer" : "global";
}

void PruneSchedule::validate() const {
  if (!(final_sparsity >= 0.0 && final_sparsity <= 1.0)) {
    throw std::invalid_argument("prune schedule: final sparsity must be in [0, 1]");
  }
  if (!(t_start < t_end)) throw std::invalid_argument("prune schedule: need t_start < t_end");
  if (update_interval < 1) throw std::invalid_argument("prune schedule: update interval must be >= 1");
}

PruneSchedule PruneSchedule::from_fractions(double final_sparsity, std::uint64_t total_steps, double start_frac,
                                            double end_frac, std::uint64_t update_interval) {
  PruneSchedule s;
  s.final_sparsity = final_sparsity;
  s.t_start = static_cast<std::uint64_t>(std::llround(start_frac * static_cast<double>(total_steps)));
  s.t_end = static_cast<std::uint64_t>(std::llround(end_frac * static_cast<double>(total_steps)));
  if (s.t_end <= s.t_start) s.t_end = s.t_start + 1;
  s.update_interval = update_interval;
  s.validate();
  return s;
}

double sparsity_at(const PruneSchedule& sched, std::uint64_t t) {
  if (t < sched.t_start) return 0.0;
  if (t > sched.t_end) return sched.final_sparsity;
  const double frac = static_cast<double>(t - sched.t_start) / static_cast<double>(sched.t_end - sched.t_start);
  const double rest = 1.0 - frac;
  return sched.final_sparsity * (1.0 - rest * rest * rest);
}

bool is_update_step(const PruneSchedule& sched, std::uint64_t t) {
  if (t < sched.t_start || t > sched.t_end) return false;
  return t == sched.t_end || t % sched.update_interval == 0;
}

}  // namespace prl::prune
