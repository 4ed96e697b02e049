#include "prl/replay/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prl::replay {

ReplayBuffer::ReplayBuffer(ReplayConfig cfg) : cfg_(cfg) {
  if (cfg_.capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  items_.resize(cfg_.capacity);
  stamps_.assign(cfg_.capacity, 0);
  if (cfg_.prioritized) {
    priorities_.assign(cfg_.capacity, 0.0);
    tree_.emplace(cfg_.capacity);
    raw_.emplace(cfg_.capacity);
  }
}

void ReplayBuffer::set_priority(std::size_t slot, double p) {
  priorities_[slot] = p;
  raw_->set(slot, p);
  tree_->set(slot, std::pow(p, cfg_.alpha));
}

void ReplayBuffer::push(Transition t) {
  const std::size_t slot = next_;
  items_[slot] = std::move(t);
  stamps_[slot] = ++pushes_;
  if (cfg_.prioritized) {
    set_priority(slot, size_ == 0 ? 1.0 : raw_->max());
  }
  next_ = (next_ + 1) % cfg_.capacity;
  size_ = std::min(size_ + 1, cfg_.capacity);
}

SampleBatch ReplayBuffer::sample(std::size_t batch, RngStream& rng) const {
  if (size_ < batch || size_ == 0) {
    throw std::logic_error("ReplayBuffer::sample: buffer holds " + std::to_string(size_) + " items, batch needs " +
                           std::to_string(batch));
  }
  SampleBatch out;
  out.items.reserve(batch);
  out.indices.reserve(batch);
  out.weights.assign(batch, 1.0);
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t slot;
    if (cfg_.prioritized) {
      slot = tree_->find(rng.uniform() * tree_->total());
      const double prob = tree_->get(slot) / tree_->total();
      out.weights[b] = std::pow(static_cast<double>(size_) * prob, -cfg_.beta);
    } else {
      slot = static_cast<std::size_t>(rng.uniform_index(size_));
    }
    out.items.push_back(items_[slot]);
    out.indices.push_back({slot, stamps_[slot]});
  }
  if (cfg_.prioritized) {
    const double max_w = *std::max_element(out.weights.begin(), out.weights.end());
    for (double& w : out.weights) w /= max_w;
  }
  return out;
}

void ReplayBuffer::update_priorities(std::span<const SampledIndex> indices, std::span<const double> td_errors) {
  if (indices.size() != td_errors.size()) throw std::invalid_argument("update_priorities: length mismatch");
  if (!cfg_.prioritized) return;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& idx = indices[i];
    if (idx.slot >= size_ || stamps_[idx.slot] != idx.stamp) continue;
    set_priority(idx.slot, std::abs(td_errors[i]) + cfg_.priority_eps);
  }
}

}  // namespace prl::replay
