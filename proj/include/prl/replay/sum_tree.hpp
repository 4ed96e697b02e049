#pragma once

#include <cstddef>
#include <vector>

namespace prl::replay {

/// Binary tree over `capacity` leaves where every internal node holds the
/// sum (and, separately, the max) of its children.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return sums_[base_ + leaf]; }
  double total() const { return sums_[1]; }
  double max() const { return maxes_[1]; }

  /// Leaf i such that prefix(i) <= mass < prefix(i+1), restricted to leaves
  /// with positive value. mass is clamped into [0, total).
  std::size_t find(double mass) const;

  /// Checks every internal node against its children (sum within 1e-9
  /// relative, max exactly) and the root against a direct leaf sum.
  bool audit() const;

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> sums_;
  std::vector<double> maxes_;
};

}  // namespace prl::replay
