#include "prl/diagnostics/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prl/tensor/linalg.hpp"

namespace prl::diagnostics {

double q_variance(std::span<const double> targets) {
  if (targets.size() < 2) throw std::invalid_argument("q_variance: need at least 2 targets");
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= static_cast<double>(targets.size());
  double ss = 0.0;
  for (double t : targets) ss += (t - mean) * (t - mean);
  return ss / static_cast<double>(targets.size() - 1);
}

void QVarianceWindow::add_batch(std::span<const double> targets) {
  sum_ += q_variance(targets);
  ++count_;
}

double QVarianceWindow::mean() const {
  return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_);
}

void QVarianceWindow::reset() {
  sum_ = 0.0;
  count_ = 0;
}

double params_norm(const net::MaskedParams& params) {
  double s = 0.0;
  for (const auto& l : params.layers) {
    auto w = l.weight.flat();
    auto m = l.mask.flat();
    for (std::size_t i = 0; i < w.size(); ++i)
      if (m[i] != 0.0) s += w[i] * w[i];
    for (double b : l.bias) s += b * b;
  }
  return std::sqrt(s);
}

double q_norm(const Matrix& q_values) {
  if (q_values.rows() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < q_values.rows(); ++r) {
    double s = 0.0;
    for (double v : q_values.row(r)) s += v * v;
    total += std::sqrt(s);
  }
  return total / static_cast<double>(q_values.rows());
}

std::size_t srank_from_singular_values(std::span<const double> sv, double delta) {
  double total = 0.0;
  for (double s : sv) total += s;
  if (total <= 0.0) return 0;
  const double needed = (1.0 - delta) * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < sv.size(); ++k) {
    cum += sv[k];
    if (cum >= needed) return k + 1;
  }
  return sv.size();
}

std::size_t srank(const Matrix& features, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("srank: delta must be in (0, 1)");
  const auto sv = svd_values(features);
  return srank_from_singular_values(sv, delta);
}

std::vector<std::vector<double>> mean_abs_activations(const net::ForwardCache& cache) {
  if (cache.empty()) throw std::invalid_argument("mean_abs_activations: empty cache");
  std::vector<std::vector<double>> out;
  for (std::size_t p = 0; p + 1 < cache.post.size(); ++p) {
    const Matrix& h = cache.post[p];
    std::vector<double> m(h.cols(), 0.0);
    for (std::size_t r = 0; r < h.rows(); ++r)
      for (std::size_t c = 0; c < h.cols(); ++c) m[c] += std::abs(h(r, c));
    for (double& v : m) v /= static_cast<double>(std::max<std::size_t>(h.rows(), 1));
    out.push_back(std::move(m));
  }
  return out;
}

DormantReport dormant_fraction(const std::vector<std::vector<double>>& mean_abs, double tau) {
  DormantReport rep;
  std::size_t total = 0, dormant = 0;
  for (const auto& layer : mean_abs) {
    double avg = 0.0;
    for (double v : layer) avg += v;
    avg /= static_cast<double>(std::max<std::size_t>(layer.size(), 1));
    std::vector<double> scores(layer.size(), 0.0);
    std::vector<bool> dead(layer.size(), true);
    for (std::size_t i = 0; i < layer.size(); ++i) {
      if (avg > 0.0) {
        scores[i] = layer[i] / avg;
        dead[i] = scores[i] <= tau;
      }
      dormant += dead[i];
    }
    total += layer.size();
    rep.scores.push_back(std::move(scores));
    rep.dormant.push_back(std::move(dead));
  }
  rep.fraction = total == 0 ? 0.0 : static_cast<double>(dormant) / static_cast<double>(total);
  return rep;
}

Matrix gradient_covariance(std::span<const std::vector<double>> per_example) {
  const std::size_t m = per_example.size();
  std::vector<double> norms(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (double v : per_example[i]) s += v * v;
    norms[i] = std::sqrt(s);
  }
  Matrix c(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double v = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0) {
        if (i == j) {
          v = 1.0;
        } else {
          double dot = 0.0;
          for (std::size_t k = 0; k < per_example[i].size(); ++k) dot += per_example[i][k] * per_example[j][k];
          v = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
        }
      }
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

Matrix gradient_covariance(const net::MaskedParams& params, const ExampleGradFn& grad_of, std::size_t count) {
  if (count > 64) throw std::invalid_argument("gradient_covariance: at most 64 probe items");
  std::vector<std::vector<double>> flat;
  flat.reserve(count);
  for (std::size_t i = 0; i < count; ++i) flat.push_back(grad_of(i).flatten_unmasked(params));
  return gradient_covariance(flat);
}

}  // namespace prl::diagnostics
