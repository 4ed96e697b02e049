#pragma once

#include <cstdint>
#include <string>

namespace prl::prune {

enum class Scope { per_layer, global };

Scope parse_scope(const std::string& s);
std::string to_string(Scope s);

/// Polynomial (cubic) sparsity ramp from 0 at t_start to final_sparsity at
/// t_end, in gradient steps. Masks are recomputed every `update_interval`
/// steps inside the window and frozen afterwards.
struct PruneSchedule {
  double final_sparsity = 0.0;
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 1;
  std::uint64_t update_interval = 100;
  Scope scope = Scope::per_layer;
  bool prune_head = true;

  /// Throws std::invalid_argument unless 0 <= t_start < t_end,
  /// final_sparsity in [0, 1] and update_interval >= 1.
  void validate() const;

  /// Window placed at fractions [start_frac, end_frac] of `total_steps`.
  static PruneSchedule from_fractions(double final_sparsity, std::uint64_t total_steps, double start_frac,
                                      double end_frac, std::uint64_t update_interval = 100);
};

double sparsity_at(const PruneSchedule& sched, std::uint64_t t);

/// True when prune_step at step t recomputes masks: t inside the window and
/// on the update grid. t_end itself always updates so the final sparsity is
/// reached exactly.
bool is_update_step(const PruneSchedule& sched, std::uint64_t t);

}  // namespace prl::prune
