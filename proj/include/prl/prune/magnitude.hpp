#pragma once

#include <cstddef>
#include <vector>

#include "prl/net/network.hpp"
#include "prl/prune/schedule.hpp"

namespace prl::prune {

/// Number of weights kept out of n at sparsity s: ceil((1 - s) n), and at
/// least one whenever s < 1.
std::size_t kept_count(std::size_t n, double sparsity);

/// Magnitude masks at `target_sparsity`. Per-layer scope ranks each prunable
/// weight matrix independently; global scope ranks all prunable weights
/// together. Currently masked weights rank lowest, then by |w|, then by flat
/// index (lower index pruned first). The head keeps its current mask when
/// `prune_head` is false.
std::vector<Matrix> magnitude_masks(const net::MaskedParams& params, double target_sparsity, Scope scope,
                                    bool prune_head = true);

/// Applies the schedule at gradient step t. Returns true if masks were
/// recomputed; masked weights are zeroed either way.
bool prune_step(net::MaskedParams& params, const PruneSchedule& sched, std::uint64_t t);

/// Masked fraction over the weights the schedule can prune.
double realized_sparsity(const net::MaskedParams& params, bool include_head = true);

}  // namespace prl::prune
