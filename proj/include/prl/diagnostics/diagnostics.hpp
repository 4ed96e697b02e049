#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "prl/net/network.hpp"

namespace prl::diagnostics {

/// One logging row.
struct MetricRecord {
  std::uint64_t step = 0;
  double episode_return = 0.0;
  double normalized_return = 0.0;
  double sparsity = 0.0;
  double q_variance = 0.0;
  double params_norm = 0.0;
  double q_norm = 0.0;
  double srank = 0.0;
  double dormant_fraction = 0.0;
  double loss = 0.0;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

/// Unbiased sample variance. Throws std::invalid_argument for fewer than 2 values.
double q_variance(std::span<const double> targets);

/// Running mean of per-batch target variances over a logging window.
class QVarianceWindow {
 public:
  void add_batch(std::span<const double> targets);
  double mean() const;
  std::size_t batches() const { return count_; }
  void reset();

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

/// l2 norm over all unmasked weights and all biases.
double params_norm(const net::MaskedParams& params);

/// Mean l2 norm of the rows of `q_values` (one row per probe observation).
double q_norm(const Matrix& q_values);

/// Smallest k whose top-k singular values reach a (1 - delta) share of their sum.
std::size_t srank_from_singular_values(std::span<const double> sv, double delta = 0.01);
std::size_t srank(const Matrix& features, double delta = 0.01);

/// Mean |activation| of every hidden unit over the probe batch, one vector
/// per hidden parameter layer.
std::vector<std::vector<double>> mean_abs_activations(const net::ForwardCache& cache);

struct DormantReport {
  double fraction = 0.0;
  /// Normalised score per unit: mean|h_i| divided by the layer average of mean|h|.
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<bool>> dormant;
};

/// Units with score <= tau are dormant; a layer with no activity at all is
/// entirely dormant. `mean_abs` is the output of mean_abs_activations.
DormantReport dormant_fraction(const std::vector<std::vector<double>>& mean_abs, double tau);

/// Cosine-similarity matrix of per-example gradient vectors; zero vectors
/// give zero rows and columns.
Matrix gradient_covariance(std::span<const std::vector<double>> per_example);

/// Per-example gradient for probe item i.
using ExampleGradFn = std::function<net::Gradients(std::size_t)>;

/// Builds flattened per-example gradients (masked positions excluded) for
/// `count` probe items and returns their correlation matrix. count <= 64.
Matrix gradient_covariance(const net::MaskedParams& params, const ExampleGradFn& grad_of, std::size_t count);

}  // namespace prl::diagnostics
