#pragma once

#include <cstdint>

#include "prl/net/network.hpp"

namespace prl::net {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1.5e-4;
};

/// First and second moments per parameter, plus the shared step count.
struct AdamState {
  Gradients m;
  Gradients v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const MaskedParams& params);
  void zero_layer(std::size_t layer);
  /// Zeroes moments of weight row `row` (incoming weights + bias of a unit).
  void zero_row(std::size_t layer, std::size_t row);
  /// Zeroes moments of weight column `col` (outgoing weights of a unit).
  void zero_col(std::size_t layer, std::size_t col);
};

/// One bias-corrected Adam update. Gradients at masked positions are ignored
/// and the masks are re-applied afterwards, so masked weights stay exactly 0.
/// Throws std::domain_error naming the layer if a gradient is non-finite.
void adam_step(MaskedParams& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace prl::net
