#include "prl/tensor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prl {

namespace {
constexpr std::size_t kMaxSide = 1024;
constexpr int kMaxSweeps = 100;
// Relative orthogonality tolerance. Since sqrt(alpha*beta) <= |A|_F^2 this
// is tighter than requiring every Gram entry below 1e-12 |A|_F^2.
constexpr double kRelTol = 1e-15;
}  // namespace

std::vector<double> svd_values(const Matrix& m) {
  if (m.rows() > kMaxSide || m.cols() > kMaxSide) {
    throw std::invalid_argument("svd_values: matrix " + m.shape_string() +
                                " exceeds the small-matrix limit");
  }
  if (!m.all_finite()) throw std::domain_error("svd_values: non-finite input");
  if (m.empty()) return {};

  // Work on whichever orientation has fewer columns, stored column-major so
  // each rotated column is contiguous: cols[j] is a row of `work`.
  const bool use_rows = m.rows() < m.cols();
  Matrix work = use_rows ? m : m.transposed();
  const std::size_t n = work.rows();
  const std::size_t len = work.cols();

  double fro2 = 0.0;
  for (double v : work.flat()) fro2 += v * v;
  if (fro2 == 0.0) return std::vector<double>(n, 0.0);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      double* cp = work.data() + p * len;
      for (std::size_t q = p + 1; q < n; ++q) {
        double* cq = work.data() + q * len;
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (std::abs(gamma) <= kRelTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < len; ++i) {
          const double x = cp[i];
          const double y = cq[i];
          cp[i] = c * x - s * y;
          cq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    const double* cj = work.data() + j * len;
    for (std::size_t i = 0; i < len; ++i) s += cj[i] * cj[i];
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> at, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  std::vector<double> x(at.begin(), at.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::domain_error("finite_diff_grad: non-finite evaluation at coordinate " +
                              std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace prl
