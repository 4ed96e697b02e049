#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prl/net/adam.hpp"
#include "prl/net/network.hpp"
#include "prl/tensor/rng.hpp"

namespace prl::interventions {

enum class Kind { none, reset, redo, weight_decay, l2_unit };

Kind parse_kind(const std::string& s);
std::string to_string(Kind k);

struct InterventionConfig {
  Kind kind = Kind::none;
  std::uint64_t period = 0;  // gradient steps between reset/redo events; 0 = default
  double redo_threshold = 0.025;
  double weight_decay = 1e-5;

  void validate() const;
  /// `period` if set, else 25% of the run for reset and 1000 for redo.
  std::uint64_t effective_period(std::uint64_t total_grad_steps) const;
};

/// grad += lambda * w at unmasked weight positions. Biases are not decayed.
void apply_weight_decay(net::Gradients& grads, const net::MaskedParams& params, double lambda);

/// Rescales every weight matrix with nonzero norm to unit Frobenius norm.
void apply_l2_unit(net::MaskedParams& params);

/// Reinitialises the last hidden layer and the head, restores their masks
/// to all-ones and zeroes their optimizer moments. Earlier layers are untouched.
void reset_last_layers(net::Network& net, net::AdamState& opt, RngStream& rng);

/// Recycles units whose dormancy score is <= threshold: incoming weights
/// redrawn from the initializer (bias zeroed), outgoing weights set to 0,
/// moments of both cleared, masks re-applied. `mean_abs` holds per-layer
/// mean |activation| (diagnostics::mean_abs_activations). Returns the
/// number of recycled units. Throws std::invalid_argument if the
/// statistics do not cover every hidden layer.
std::size_t redo(net::Network& net, net::AdamState& opt, const std::vector<std::vector<double>>& mean_abs,
                 double threshold, RngStream& rng);

}  // namespace prl::interventions
