#include "prl/prune/magnitude.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prl::prune {

namespace {

struct Entry {
  bool unmasked;
  double magnitude;
  std::size_t index;  // flat index across the ranked group

  bool operator<(const Entry& o) const {
    if (unmasked != o.unmasked) return !unmasked;
    if (magnitude != o.magnitude) return magnitude < o.magnitude;
    return index < o.index;
  }
};

// Marks the k lowest-ranked entries of `group` as pruned in `masks`.
void prune_lowest(std::vector<Entry>& group, std::size_t k,
                  const std::vector<std::pair<std::size_t, std::size_t>>& locate, std::vector<Matrix>& masks) {
  if (k == 0) return;
  if (k < group.size()) std::nth_element(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(k), group.end());
  for (std::size_t i = 0; i < k; ++i) {
    const auto [layer, flat] = locate[group[i].index];
    masks[layer].flat()[flat] = 0.0;
  }
}

}  // namespace

std::size_t kept_count(std::size_t n, double sparsity) {
  if (n == 0) return 0;
  if (sparsity <= 0.0) return n;
  if (sparsity >= 1.0) return 0;
  // The epsilon absorbs representation error, e.g. (1 - 0.9) * 100 = 10.000000000000002.
  const double exact = (1.0 - sparsity) * static_cast<double>(n);
  auto keep = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  return std::clamp<std::size_t>(keep, 1, n);
}

std::vector<Matrix> magnitude_masks(const net::MaskedParams& params, double target_sparsity, Scope scope,
                                    bool prune_head) {
  if (!(target_sparsity >= 0.0 && target_sparsity <= 1.0)) {
    throw std::invalid_argument("magnitude_masks: sparsity must be in [0, 1]");
  }
  const std::size_t n_layers = params.layers.size();
  std::vector<Matrix> masks;
  masks.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const bool prunable = prune_head || l + 1 < n_layers;
    masks.push_back(prunable ? Matrix(params.layers[l].mask.rows(), params.layers[l].mask.cols(), 1.0)
                             : params.layers[l].mask);
  }

  auto collect = [&](std::size_t l, std::vector<Entry>& group, std::vector<std::pair<std::size_t, std::size_t>>& locate) {
    auto w = params.layers[l].weight.flat();
    auto m = params.layers[l].mask.flat();
    for (std::size_t i = 0; i < w.size(); ++i) {
      group.push_back({m[i] != 0.0, std::abs(w[i]), locate.size()});
      locate.emplace_back(l, i);
    }
  };

  if (scope == Scope::per_layer) {
    for (std::size_t l = 0; l < n_layers; ++l) {
      if (!(prune_head || l + 1 < n_layers)) continue;
      std::vector<Entry> group;
      std::vector<std::pair<std::size_t, std::size_t>> locate;
      collect(l, group, locate);
      const std::size_t n = group.size();
      prune_lowest(group, n - kept_count(n, target_sparsity), locate, masks);
    }
  } else {
    std::vector<Entry> group;
    std::vector<std::pair<std::size_t, std::size_t>> locate;
    for (std::size_t l = 0; l < n_layers; ++l)
      if (prune_head || l + 1 < n_layers) collect(l, group, locate);
    const std::size_t n = group.size();
    prune_lowest(group, n - kept_count(n, target_sparsity), locate, masks);
  }
  return masks;
}

bool prune_step(net::MaskedParams& params, const PruneSchedule& sched, std::uint64_t t) {
  bool updated = false;
  if (is_update_step(sched, t)) {
    auto masks = magnitude_masks(params, sparsity_at(sched, t), sched.scope, sched.prune_head);
    for (std::size_t l = 0; l < masks.size(); ++l) params.layers[l].mask = std::move(masks[l]);
    updated = true;
  }
  params.apply_masks();
  return updated;
}

double realized_sparsity(const net::MaskedParams& params, bool include_head) {
  std::size_t total = 0, masked = 0;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    if (!include_head && l + 1 == params.layers.size()) continue;
    for (double m : params.layers[l].mask.flat()) {
      ++total;
      masked += (m == 0.0);
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(masked) / static_cast<double>(total);
}

}  // namespace prl::prune
