#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prl/tensor/matrix.hpp"
#include "prl/tensor/rng.hpp"

namespace prl::net {

enum class Arch { mlp, residual };
enum class LayerKind { dense, residual_block };
enum class Activation { relu, none };

Arch parse_arch(const std::string& s);
std::string to_string(Arch a);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::relu;
};

/// Output head: one Q-value per action, or a categorical distribution over
/// `num_atoms` evenly spaced return atoms in [v_min, v_max] per action.
struct Head {
  enum class Kind { scalar, categorical };
  Kind kind = Kind::scalar;
  std::size_t num_atoms = 1;
  double v_min = 0.0;
  double v_max = 0.0;

  static Head scalar() { return {Kind::scalar, 1, 0.0, 0.0}; }
  static Head categorical(std::size_t atoms, double v_min, double v_max) {
    return {Kind::categorical, atoms, v_min, v_max};
  }
  bool is_categorical() const { return kind == Kind::categorical; }
  std::vector<double> support() const;
  friend bool operator==(const Head&, const Head&) = default;
};

/// One weight matrix (out x in), its bias, and its 0/1 mask.
/// Invariant: weight(i, j) == 0 wherever mask(i, j) == 0.
struct LayerParams {
  std::string name;
  Matrix weight;
  std::vector<double> bias;
  Matrix mask;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct MaskedParams {
  std::vector<LayerParams> layers;

  std::size_t weight_count() const;
  std::size_t bias_count() const;
  std::size_t masked_count() const;
  /// Fraction of weights (not biases) currently masked.
  double sparsity() const;
  /// Zeroes every masked weight.
  void apply_masks();
  bool masks_respected() const;
  friend bool operator==(const MaskedParams&, const MaskedParams&) = default;
};

struct NetSpec {
  Arch arch = Arch::mlp;
  std::size_t width_multiplier = 1;
  std::size_t base_width = 64;
  std::size_t in_dim = 0;
  std::size_t n_actions = 0;
  Head head = Head::scalar();

  std::size_t hidden_width() const { return base_width * width_multiplier; }
  std::size_t output_dim() const { return n_actions * head.num_atoms; }
  friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

struct Network {
  NetSpec spec;
  std::vector<LayerSpec> layers;
  MaskedParams params;

  std::size_t output_dim() const { return spec.output_dim(); }
  /// Number of weight matrices whose outputs are hidden units (all but the head).
  std::size_t hidden_param_layers() const { return params.layers.size() - 1; }
};

/// Builds the layer list for `spec`. mlp: two hidden dense layers of width
/// base*multiplier. residual: input projection followed by two residual
/// blocks of that width. Both end in a linear head.
std::vector<LayerSpec> make_layer_specs(const NetSpec& spec);

/// Closed-form trainable parameter count (weights + biases) for a layer list.
std::size_t parameter_count(std::span<const LayerSpec> specs);

/// Throws std::invalid_argument on zero dimensions or a multiplier outside 1..8.
Network build_network(const NetSpec& spec, RngStream& rng);

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero bias, all-ones mask.
void init_layer(LayerParams& layer, RngStream& rng);

/// Activations retained by a training-mode forward pass.
/// For parameter layer p, `pre[p]` is the value fed to its activation
/// (including the skip term for the second matrix of a residual block) and
/// `post[p]` the activation output. The input of layer p is post[p-1], or
/// `input` for p == 0.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  bool empty() const { return pre.empty(); }
  const Matrix& layer_input(std::size_t p) const { return p == 0 ? input : post[p - 1]; }
  /// Activations of the last hidden layer (rows = batch).
  const Matrix& penultimate() const { return post[post.size() - 2]; }
};

struct BatchOutput {
  Matrix output;  // batch x output_dim (q-values or logits)
  ForwardCache cache;
};

/// Batched forward pass; rows of `x` are observations. The effective weight
/// is always weight .* mask. Activations are cached iff `training`.
BatchOutput forward_batch(const Network& net, const Matrix& x, bool training);

/// Single-observation result.
struct NetworkOutput {
  std::vector<double> q_values;  // scalar head; expected values for categorical
  Matrix logits;                 // n_actions x num_atoms (categorical head only)
  ForwardCache cache;            // populated iff training
};

NetworkOutput forward(const Network& net, std::span<const double> x, bool training);

struct LayerGrad {
  Matrix weight;
  std::vector<double> bias;
};

struct Gradients {
  std::vector<LayerGrad> layers;

  static Gradients zeros_like(const MaskedParams& params);
  double squared_norm() const;
  /// Concatenated weight gradients at unmasked positions, then all biases.
  std::vector<double> flatten_unmasked(const MaskedParams& params) const;
};

/// Backpropagates `grad_output` (batch x output_dim) through the cached
/// forward pass. Gradients at masked positions are exactly 0.
/// Throws std::logic_error when the cache is missing.
Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& grad_output);

/// Row-wise softmax over the atoms of each action: logits row of length
/// n_actions*atoms -> probabilities of the same layout.
void softmax_atoms(std::span<const double> logits, std::size_t atoms, std::span<double> probs);

/// Expected value sum_i z_i p_i for every action.
std::vector<double> expected_values(std::span<const double> probs, std::span<const double> support);

}  // namespace prl::net
