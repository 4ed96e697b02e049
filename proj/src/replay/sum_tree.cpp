#include "prl/replay/sum_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prl::replay {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("SumTree: capacity must be positive");
  base_ = 1;
  while (base_ < capacity) base_ <<= 1;
  sums_.assign(2 * base_, 0.0);
  maxes_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t leaf, double value) {
  if (leaf >= capacity_) throw std::out_of_range("SumTree::set: leaf out of range");
  if (!(value >= 0.0) || !std::isfinite(value)) throw std::invalid_argument("SumTree::set: bad value");
  std::size_t i = base_ + leaf;
  sums_[i] = value;
  maxes_[i] = value;
  for (i >>= 1; i >= 1; i >>= 1) {
    sums_[i] = sums_[2 * i] + sums_[2 * i + 1];
    maxes_[i] = std::max(maxes_[2 * i], maxes_[2 * i + 1]);
  }
}

std::size_t SumTree::find(double mass) const {
  if (!(total() > 0.0)) throw std::logic_error("SumTree::find: empty tree");
  mass = std::clamp(mass, 0.0, total());
  std::size_t i = 1;
  while (i < base_) {
    const double left = sums_[2 * i];
    // Descend right only if the right subtree has mass, so rounding never
    // lands on an empty leaf.
    if (mass < left || sums_[2 * i + 1] <= 0.0) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  return i - base_;
}

bool SumTree::audit() const {
  for (std::size_t i = base_ - 1; i >= 1; --i) {
    const double s = sums_[2 * i] + sums_[2 * i + 1];
    if (std::abs(sums_[i] - s) > 1e-9 * std::max(1.0, std::abs(s))) return false;
    if (maxes_[i] != std::max(maxes_[2 * i], maxes_[2 * i + 1])) return false;
  }
  double direct = 0.0;
  for (std::size_t l = 0; l < capacity_; ++l) direct += sums_[base_ + l];
  return std::abs(direct - total()) <= 1e-9 * std::max(1.0, direct);
}

}  // namespace prl::replay
