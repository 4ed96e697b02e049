#include "prl/net/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prl/tensor/kernels.hpp"

namespace prl::net {

namespace {

struct ParamRole {
  Activation act;
  bool residual_outer;  // second matrix of a residual block: adds the block input
};

std::vector<ParamRole> param_roles(const std::vector<LayerSpec>& specs) {
  std::vector<ParamRole> roles;
  for (const auto& s : specs) {
    if (s.kind == LayerKind::dense) {
      roles.push_back({s.activation, false});
    } else {
      roles.push_back({Activation::relu, false});
      roles.push_back({s.activation, true});
    }
  }
  return roles;
}

void relu_inplace(Matrix& m) {
  for (double& v : m.flat()) v = v > 0.0 ? v : 0.0;
}

void add_inplace(Matrix& dst, const Matrix& src) {
  auto d = dst.flat();
  auto s = src.flat();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

Arch parse_arch(const std::string& s) {
  if (s == "mlp") return Arch::mlp;
  if (s == "residual") return Arch::residual;
  throw std::invalid_argument("unknown arch '" + s + "' (expected mlp|residual)");
}

std::string to_string(Arch a) {
  return a == Arch::mlp ? "mlp" : "residual";
}

std::vector<double> Head::support() const {
  if (!is_categorical()) return {};
  std::vector<double> z(num_atoms);
  const double dz = (v_max - v_min) / static_cast<double>(num_atoms - 1);
  for (std::size_t i = 0; i < num_atoms; ++i) z[i] = v_min + dz * static_cast<double>(i);
  z.back() = v_max;
  return z;
}

std::size_t MaskedParams::weight_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size();
  return n;
}

std::size_t MaskedParams::bias_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.bias.size();
  return n;
}

std::size_t MaskedParams::masked_count() const {
  std::size_t n = 0;
  for (const auto& l : layers)
    for (double m : l.mask.flat()) n += (m == 0.0);
  return n;
}

double MaskedParams::sparsity() const {
  const std::size_t total = weight_count();
  return total == 0 ? 0.0 : static_cast<double>(masked_count()) / static_cast<double>(total);
}

void MaskedParams::apply_masks() {
  for (auto& l : layers) {
    auto w = l.weight.flat();
    auto m = l.mask.flat();
    for (std::size_t i = 0; i < w.size(); ++i)
      if (m[i] == 0.0) w[i] = 0.0;
  }
}

bool MaskedParams::masks_respected() const {
  for (const auto& l : layers) {
    auto w = l.weight.flat();
    auto m = l.mask.flat();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m[i] != 0.0 && m[i] != 1.0) return false;
      if (m[i] == 0.0 && w[i] != 0.0) return false;
    }
  }
  return true;
}

std::vector<LayerSpec> make_layer_specs(const NetSpec& spec) {
  const std::size_t h = spec.hidden_width();
  std::vector<LayerSpec> specs;
  if (spec.arch == Arch::mlp) {
    specs.push_back({LayerKind::dense, spec.in_dim, h, Activation::relu});
    specs.push_back({LayerKind::dense, h, h, Activation::relu});
  } else {
    specs.push_back({LayerKind::dense, spec.in_dim, h, Activation::relu});
    specs.push_back({LayerKind::residual_block, h, h, Activation::relu});
    specs.push_back({LayerKind::residual_block, h, h, Activation::relu});
  }
  specs.push_back({LayerKind::dense, h, spec.output_dim(), Activation::none});
  return specs;
}

std::size_t parameter_count(std::span<const LayerSpec> specs) {
  std::size_t n = 0;
  for (const auto& s : specs) {
    const std::size_t dense = s.in_dim * s.out_dim + s.out_dim;
    n += s.kind == LayerKind::dense ? dense : dense + s.out_dim * s.out_dim + s.out_dim;
  }
  return n;
}

void init_layer(LayerParams& layer, RngStream& rng) {
  const double fan_out = static_cast<double>(layer.weight.rows());
  const double fan_in = static_cast<double>(layer.weight.cols());
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& w : layer.weight.flat()) w = rng.uniform(-limit, limit);
  std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  layer.mask.fill(1.0);
}

Network build_network(const NetSpec& spec, RngStream& rng) {
  if (spec.width_multiplier < 1 || spec.width_multiplier > 8) {
    throw std::invalid_argument("build_network: width multiplier must be in 1..8, got " +
                                std::to_string(spec.width_multiplier));
  }
  if (spec.in_dim == 0 || spec.n_actions == 0 || spec.base_width == 0) {
    throw std::invalid_argument("build_network: zero dimension (in=" + std::to_string(spec.in_dim) +
                                ", actions=" + std::to_string(spec.n_actions) +
                                ", base width=" + std::to_string(spec.base_width) + ")");
  }
  if (spec.head.is_categorical() && (spec.head.num_atoms < 2 || !(spec.head.v_min < spec.head.v_max))) {
    throw std::invalid_argument("build_network: categorical head needs >= 2 atoms and v_min < v_max");
  }

  Network net;
  net.spec = spec;
  net.layers = make_layer_specs(spec);
  int block = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& s = net.layers[i];
    auto make = [&](std::string name, std::size_t in, std::size_t out) {
      LayerParams p{std::move(name), Matrix(out, in), std::vector<double>(out, 0.0), Matrix(out, in, 1.0)};
      init_layer(p, rng);
      net.params.layers.push_back(std::move(p));
    };
    if (s.kind == LayerKind::dense) {
      make(i + 1 == net.layers.size() ? "head" : "dense" + std::to_string(i), s.in_dim, s.out_dim);
    } else {
      ++block;
      make("block" + std::to_string(block) + ".fc1", s.in_dim, s.out_dim);
      make("block" + std::to_string(block) + ".fc2", s.out_dim, s.out_dim);
    }
  }
  return net;
}

BatchOutput forward_batch(const Network& net, const Matrix& x, bool training) {
  if (x.cols() != net.spec.in_dim) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) +
                                " features, network expects " + std::to_string(net.spec.in_dim));
  }
  const auto roles = param_roles(net.layers);
  const auto& layers = net.params.layers;
  if (roles.size() != layers.size()) throw std::logic_error("forward: layer specs and params disagree");

  const std::size_t batch = x.rows();
  std::vector<Matrix> pre(layers.size());
  std::vector<Matrix> post(layers.size());
  Matrix wt;
  for (std::size_t p = 0; p < layers.size(); ++p) {
    const auto& l = layers[p];
    const Matrix& in = p == 0 ? x : post[p - 1];
    wt = Matrix(l.weight.cols(), l.weight.rows());
    kernels::masked_transpose(l.weight, l.mask, wt);
    Matrix z(batch, l.weight.rows());
    kernels::gemm_nn(in, wt, z);
    kernels::add_row_bias(z, l.bias);
    if (roles[p].residual_outer) add_inplace(z, p < 2 ? x : post[p - 2]);
    Matrix a = z;
    if (roles[p].act == Activation::relu) relu_inplace(a);
    pre[p] = std::move(z);
    post[p] = std::move(a);
  }

  BatchOutput out;
  out.output = post.back();
  if (training) {
    out.cache.input = x;
    out.cache.pre = std::move(pre);
    out.cache.post = std::move(post);
  }
  return out;
}

NetworkOutput forward(const Network& net, std::span<const double> x, bool training) {
  if (x.size() != net.spec.in_dim) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.size()) +
                                " features, network expects " + std::to_string(net.spec.in_dim));
  }
  NetworkOutput out;
  std::vector<double> result;
  if (training) {
    Matrix xm(1, x.size(), std::vector<double>(x.begin(), x.end()));
    auto b = forward_batch(net, xm, true);
    result.assign(b.output.flat().begin(), b.output.flat().end());
    out.cache = std::move(b.cache);
  } else {
    // Matrix-vector path; avoids materialising transposed weights per call.
    const auto roles = param_roles(net.layers);
    const auto& layers = net.params.layers;
    std::vector<std::vector<double>> post(layers.size());
    for (std::size_t p = 0; p < layers.size(); ++p) {
      const auto& l = layers[p];
      const std::span<const double> in = p == 0 ? x : std::span<const double>(post[p - 1]);
      std::vector<double> z(l.weight.rows());
      for (std::size_t o = 0; o < z.size(); ++o) {
        const double* w = l.weight.data() + o * l.weight.cols();
        const double* m = l.mask.data() + o * l.weight.cols();
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        std::size_t i = 0;
        for (; i + 4 <= in.size(); i += 4)
          for (std::size_t t = 0; t < 4; ++t) acc[t] += w[i + t] * m[i + t] * in[i + t];
        for (; i < in.size(); ++i) acc[0] += w[i] * m[i] * in[i];
        z[o] = l.bias[o] + ((acc[0] + acc[1]) + (acc[2] + acc[3]));
      }
      if (roles[p].residual_outer) {
        const std::span<const double> skip = p < 2 ? x : std::span<const double>(post[p - 2]);
        for (std::size_t o = 0; o < z.size(); ++o) z[o] += skip[o];
      }
      if (roles[p].act == Activation::relu)
        for (double& v : z) v = v > 0.0 ? v : 0.0;
      post[p] = std::move(z);
    }
    result = std::move(post.back());
  }

  const auto& head = net.spec.head;
  if (head.is_categorical()) {
    out.logits = Matrix(net.spec.n_actions, head.num_atoms, result);
    std::vector<double> probs(result.size());
    softmax_atoms(result, head.num_atoms, probs);
    out.q_values = expected_values(probs, head.support());
  } else {
    out.q_values = std::move(result);
  }
  return out;
}

Gradients Gradients::zeros_like(const MaskedParams& params) {
  Gradients g;
  for (const auto& l : params.layers) {
    g.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()), std::vector<double>(l.bias.size(), 0.0)});
  }
  return g;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) {
    for (double v : l.weight.flat()) s += v * v;
    for (double v : l.bias) s += v * v;
  }
  return s;
}

std::vector<double> Gradients::flatten_unmasked(const MaskedParams& params) const {
  std::vector<double> out;
  for (std::size_t p = 0; p < layers.size(); ++p) {
    auto g = layers[p].weight.flat();
    auto m = params.layers[p].mask.flat();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (m[i] != 0.0) out.push_back(g[i]);
  }
  for (const auto& l : layers) out.insert(out.end(), l.bias.begin(), l.bias.end());
  return out;
}

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& grad_output) {
  const auto& layers = net.params.layers;
  if (cache.empty() || cache.pre.size() != layers.size()) {
    throw std::logic_error("backward: no cached activations (run forward in training mode)");
  }
  if (grad_output.rows() != cache.input.rows() || grad_output.cols() != net.output_dim()) {
    throw std::invalid_argument("backward: output gradient " + grad_output.shape_string() +
                                " does not match batch x output_dim");
  }
  const auto roles = param_roles(net.layers);
  const std::size_t batch = grad_output.rows();

  Gradients grads = Gradients::zeros_like(net.params);
  std::vector<Matrix> dpost(layers.size());
  dpost.back() = grad_output;
  auto accumulate = [&](std::size_t idx, Matrix&& g) {
    if (dpost[idx].empty()) dpost[idx] = std::move(g);
    else add_inplace(dpost[idx], g);
  };

  for (std::size_t p = layers.size(); p-- > 0;) {
    const auto& l = layers[p];
    Matrix dpre = std::move(dpost[p]);
    if (roles[p].act == Activation::relu) {
      auto d = dpre.flat();
      auto z = cache.pre[p].flat();
      for (std::size_t i = 0; i < d.size(); ++i)
        if (!(z[i] > 0.0)) d[i] = 0.0;
    }
    if (roles[p].residual_outer && p >= 2) accumulate(p - 2, Matrix(dpre));

    auto& g = grads.layers[p];
    kernels::gemm_tn(dpre, cache.layer_input(p), g.weight);
    auto gw = g.weight.flat();
    auto m = l.mask.flat();
    for (std::size_t i = 0; i < gw.size(); ++i)
      if (m[i] == 0.0) gw[i] = 0.0;
    kernels::accumulate_col_sums(dpre, g.bias);

    if (p > 0) {
      Matrix eff = l.weight;
      auto e = eff.flat();
      for (std::size_t i = 0; i < e.size(); ++i) e[i] *= m[i];
      Matrix dinput(batch, l.weight.cols());
      kernels::gemm_nn(dpre, eff, dinput);
      accumulate(p - 1, std::move(dinput));
    }
  }
  return grads;
}

void softmax_atoms(std::span<const double> logits, std::size_t atoms, std::span<double> probs) {
  for (std::size_t start = 0; start < logits.size(); start += atoms) {
    double mx = logits[start];
    for (std::size_t i = 1; i < atoms; ++i) mx = std::max(mx, logits[start + i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      probs[start + i] = std::exp(logits[start + i] - mx);
      sum += probs[start + i];
    }
    for (std::size_t i = 0; i < atoms; ++i) probs[start + i] /= sum;
  }
}

std::vector<double> expected_values(std::span<const double> probs, std::span<const double> support) {
  const std::size_t atoms = support.size();
  std::vector<double> q(probs.size() / atoms);
  for (std::size_t a = 0; a < q.size(); ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) s += support[i] * probs[a * atoms + i];
    q[a] = s;
  }
  return q;
}

}  // namespace prl::net
