#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prl/replay/sum_tree.hpp"
#include "prl/replay/transition.hpp"
#include "prl/tensor/rng.hpp"

namespace prl::replay {

struct ReplayConfig {
  std::size_t capacity = 100000;
  bool prioritized = false;
  double alpha = 0.5;          // priority exponent
  double beta = 0.5;           // importance-sampling exponent (fixed)
  double priority_eps = 1e-6;  // floor added to |td error|
};

/// Slot plus the insertion stamp it held when sampled; used to drop
/// priority updates for slots overwritten since.
struct SampledIndex {
  std::size_t slot = 0;
  std::uint64_t stamp = 0;
};

struct SampleBatch {
  std::vector<Transition> items;
  std::vector<SampledIndex> indices;
  std::vector<double> weights;  // importance weights, max-normalised; all 1 when uniform
};

/// Ring buffer of transitions with optional proportional prioritisation.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(ReplayConfig cfg);

  const ReplayConfig& config() const { return cfg_; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return cfg_.capacity; }
  bool prioritized() const { return cfg_.prioritized; }

  /// Overwrites the oldest item when full. In prioritised mode the new item
  /// gets the current maximum priority (1.0 for an empty buffer).
  void push(Transition t);

  /// Throws std::logic_error if fewer than `batch` items are stored.
  SampleBatch sample(std::size_t batch, RngStream& rng) const;

  /// p_i = |td_i| + eps. Stale indices are skipped silently.
  void update_priorities(std::span<const SampledIndex> indices, std::span<const double> td_errors);

  const Transition& at(std::size_t slot) const { return items_.at(slot); }
  /// Raw priority p_i of a slot (before the alpha exponent).
  double priority(std::size_t slot) const { return priorities_.at(slot); }
  /// Sampling tree (p^alpha per slot). Prioritised mode only.
  const SumTree& tree() const { return *tree_; }

 private:
  void set_priority(std::size_t slot, double p);

  ReplayConfig cfg_;
  std::vector<Transition> items_;
  std::vector<std::uint64_t> stamps_;
  std::vector<double> priorities_;
  std::optional<SumTree> tree_;  // p^alpha, drives sampling
  std::optional<SumTree> raw_;   // raw p, for the running maximum
  std::size_t next_ = 0;
  std::size_t size_ = 0;
  std::uint64_t pushes_ = 0;
};

}  // namespace prl::replay
