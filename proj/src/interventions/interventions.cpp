#include "prl/interventions/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prl/diagnostics/diagnostics.hpp"

namespace prl::interventions {

Kind parse_kind(const std::string& s) {
  if (s == "none") return Kind::none;
  if (s == "reset") return Kind::reset;
  if (s == "redo") return Kind::redo;
  if (s == "weight-decay" || s == "wd") return Kind::weight_decay;
  if (s == "l2-unit" || s == "l2") return Kind::l2_unit;
  throw std::invalid_argument("unknown intervention '" + s + "' (expected none|reset|redo|weight-decay|l2-unit)");
}

std::string to_string(Kind k) {
  switch (k) {
    case Kind::none: return "none";
    case Kind::reset: return "reset";
    case Kind::redo: return "redo";
    case Kind::weight_decay: return "weight-decay";
    case Kind::l2_unit: return "l2-unit";
  }
  return "none";
}

void InterventionConfig::validate() const {
  if (!(redo_threshold >= 0.0)) throw std::invalid_argument("redo threshold must be >= 0");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be >= 0");
}

std::uint64_t InterventionConfig::effective_period(std::uint64_t total_grad_steps) const {
  if (period > 0) return period;
  if (kind == Kind::reset) return std::max<std::uint64_t>(1, total_grad_steps / 4);
  return 1000;
}

void apply_weight_decay(net::Gradients& grads, const net::MaskedParams& params, double lambda) {
  if (lambda == 0.0) return;
  for (std::size_t p = 0; p < params.layers.size(); ++p) {
    auto g = grads.layers[p].weight.flat();
    auto w = params.layers[p].weight.flat();
    auto m = params.layers[p].mask.flat();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (m[i] != 0.0) g[i] += lambda * w[i];
  }
}

void apply_l2_unit(net::MaskedParams& params) {
  for (auto& l : params.layers) {
    const double norm = l.weight.frobenius_norm();
    if (norm == 0.0 || norm == 1.0) continue;
    for (double& w : l.weight.flat()) w /= norm;
  }
}

void reset_last_layers(net::Network& net, net::AdamState& opt, RngStream& rng) {
  auto& layers = net.params.layers;
  const std::size_t n = layers.size();
  for (std::size_t p = n >= 2 ? n - 2 : 0; p < n; ++p) {
    net::init_layer(layers[p], rng);
    opt.zero_layer(p);
  }
}

std::size_t redo(net::Network& net, net::AdamState& opt, const std::vector<std::vector<double>>& mean_abs,
                 double threshold, RngStream& rng) {
  auto& layers = net.params.layers;
  if (mean_abs.size() != net.hidden_param_layers()) {
    throw std::invalid_argument("redo: activation statistics missing (got " + std::to_string(mean_abs.size()) +
                                " layers, need " + std::to_string(net.hidden_param_layers()) + ")");
  }
  for (std::size_t p = 0; p < mean_abs.size(); ++p) {
    if (mean_abs[p].size() != layers[p].weight.rows()) {
      throw std::invalid_argument("redo: statistics for layer " + layers[p].name + " have the wrong width");
    }
  }
  const auto report = diagnostics::dormant_fraction(mean_abs, threshold);

  std::size_t recycled = 0;
  for (std::size_t p = 0; p < mean_abs.size(); ++p) {
    auto& in = layers[p];
    auto& out = layers[p + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in.weight.rows() + in.weight.cols()));
    for (std::size_t unit = 0; unit < in.weight.rows(); ++unit) {
      if (!report.dormant[p][unit]) continue;
      ++recycled;
      for (double& w : in.weight.row(unit)) w = rng.uniform(-limit, limit);
      in.bias[unit] = 0.0;
      for (std::size_t r = 0; r < out.weight.rows(); ++r) out.weight(r, unit) = 0.0;
      opt.zero_row(p, unit);
      opt.zero_col(p + 1, unit);
    }
  }
  net.params.apply_masks();
  return recycled;
}

}  // namespace prl::interventions
