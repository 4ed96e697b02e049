#include "prl/net/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace prl::net {

AdamState AdamState::zeros_like(const MaskedParams& params) {
  return {Gradients::zeros_like(params), Gradients::zeros_like(params), 0};
}

void AdamState::zero_layer(std::size_t layer) {
  for (Gradients* g : {&m, &v}) {
    g->layers[layer].weight.fill(0.0);
    std::fill(g->layers[layer].bias.begin(), g->layers[layer].bias.end(), 0.0);
  }
}

void AdamState::zero_row(std::size_t layer, std::size_t row) {
  for (Gradients* g : {&m, &v}) {
    auto r = g->layers[layer].weight.row(row);
    std::fill(r.begin(), r.end(), 0.0);
    g->layers[layer].bias[row] = 0.0;
  }
}

void AdamState::zero_col(std::size_t layer, std::size_t col) {
  for (Gradients* g : {&m, &v}) {
    auto& w = g->layers[layer].weight;
    for (std::size_t r = 0; r < w.rows(); ++r) w(r, col) = 0.0;
  }
}

namespace {

void check_finite(const LayerGrad& g, const std::string& name) {
  for (double x : g.weight.flat())
    if (!std::isfinite(x)) throw std::domain_error("adam_step: non-finite weight gradient in layer " + name);
  for (double x : g.bias)
    if (!std::isfinite(x)) throw std::domain_error("adam_step: non-finite bias gradient in layer " + name);
}

}  // namespace

void adam_step(MaskedParams& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
  if (grads.layers.size() != params.layers.size() || state.m.layers.size() != params.layers.size()) {
    throw std::invalid_argument("adam_step: gradient/state layer count does not match params");
  }
  for (std::size_t p = 0; p < params.layers.size(); ++p) check_finite(grads.layers[p], params.layers[p].name);

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);

  const double lr = cfg.lr, b1 = cfg.beta1, b2 = cfg.beta2, eps = cfg.eps;
  auto update = [=](std::size_t n, double* __restrict w, const double* __restrict g, double* __restrict m,
                    double* __restrict v, const double* __restrict mask) {
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = mask ? g[i] * mask[i] : g[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  };

  for (std::size_t p = 0; p < params.layers.size(); ++p) {
    auto& l = params.layers[p];
    const auto& g = grads.layers[p];
    if (g.weight.rows() != l.weight.rows() || g.weight.cols() != l.weight.cols() || g.bias.size() != l.bias.size()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch in layer " + l.name);
    }
    update(l.weight.size(), l.weight.data(), g.weight.data(), state.m.layers[p].weight.data(),
           state.v.layers[p].weight.data(), l.mask.data());
    update(l.bias.size(), l.bias.data(), g.bias.data(), state.m.layers[p].bias.data(), state.v.layers[p].bias.data(),
           nullptr);
  }
  params.apply_masks();
}

}  // namespace prl::net
