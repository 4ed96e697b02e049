#include "prl/tensor/kernels.hpp"

#include <cassert>
#include <algorithm>
#include <cstddef>
#include <cstring>
#include <vector>

namespace prl::kernels {

namespace {
// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = 1 << 16;

using v4d = double __attribute__((vector_size(32)));

// C rows [0, MR) = sum_k A(r, k) * B(k, :), A packed as ap[k * MR + r].
// Accumulation runs over k in increasing order for every output element.
template <std::size_t MR>
inline void micro_rows(const double* ap, const double* b, std::size_t kd, std::size_t n, double* c) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    v4d acc0[MR] = {};
    v4d acc1[MR] = {};
    for (std::size_t k = 0; k < kd; ++k) {
      v4d b0, b1;
      std::memcpy(&b0, b + k * n + j, sizeof b0);
      std::memcpy(&b1, b + k * n + j + 4, sizeof b1);
      for (std::size_t r = 0; r < MR; ++r) {
        const double av = ap[k * MR + r];
        acc0[r] += av * b0;
        acc1[r] += av * b1;
      }
    }
    for (std::size_t r = 0; r < MR; ++r) {
      std::memcpy(c + r * n + j, &acc0[r], sizeof acc0[r]);
      std::memcpy(c + r * n + j + 4, &acc1[r], sizeof acc1[r]);
    }
  }
  for (; j < n; ++j) {
    for (std::size_t r = 0; r < MR; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kd; ++k) acc += ap[k * MR + r] * b[k * n + j];
      c[r * n + j] = acc;
    }
  }
}

// One block of up to 4 output rows. Kept out of line: inlined into the
// OpenMP-outlined body it loses register allocation for the accumulators.
__attribute__((noinline)) void gemm_block(const double* a, std::size_t si, std::size_t sk, std::size_t i0,
                                          std::size_t rows, std::size_t kd, const double* b, std::size_t n, double* c,
                                          double* ap) {
  for (std::size_t k = 0; k < kd; ++k)
    for (std::size_t r = 0; r < rows; ++r) ap[k * rows + r] = a[(i0 + r) * si + k * sk];
  double* cb = c + i0 * n;
  switch (rows) {
    case 4: micro_rows<4>(ap, b, kd, n, cb); break;
    case 3: micro_rows<3>(ap, b, kd, n, cb); break;
    case 2: micro_rows<2>(ap, b, kd, n, cb); break;
    default: micro_rows<1>(ap, b, kd, n, cb); break;
  }
}

// Blocks of 4 output rows, A(i, k) = a[i * si + k * sk].
void gemm_strided(const double* a, std::size_t si, std::size_t sk, std::size_t m, std::size_t kd, const double* b,
                  std::size_t n, double* c) {
  constexpr std::size_t MR = 4;
  const std::ptrdiff_t blocks = static_cast<std::ptrdiff_t>((m + MR - 1) / MR);
  const bool par = m * kd * n > kParallelWork;
#pragma omp parallel if (par)
  {
    std::vector<double> ap(kd * MR);
#pragma omp for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
      const std::size_t i0 = static_cast<std::size_t>(blk) * MR;
      gemm_block(a, si, sk, i0, std::min(MR, m - i0), kd, b, n, c, ap.data());
    }
  }
}

}  // namespace

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols());
  gemm_strided(a.data(), a.cols(), 1, a.rows(), a.cols(), b.data(), b.cols(), c.data());
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols());
  gemm_strided(a.data(), 1, a.cols(), a.cols(), a.rows(), b.data(), b.cols(), c.data());
}

void masked_transpose(const Matrix& w, const Matrix& mask, Matrix& out) {
  assert(w.rows() == mask.rows() && w.cols() == mask.cols());
  assert(out.rows() == w.cols() && out.cols() == w.rows());
  constexpr std::size_t T = 16;
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  const std::ptrdiff_t tiles = static_cast<std::ptrdiff_t>((rows + T - 1) / T);
#pragma omp parallel for schedule(static) if (w.size() > kParallelWork)
  for (std::ptrdiff_t tr = 0; tr < tiles; ++tr) {
    const std::size_t r0 = static_cast<std::size_t>(tr) * T;
    const std::size_t r1 = std::min(rows, r0 + T);
    for (std::size_t c0 = 0; c0 < cols; c0 += T) {
      const std::size_t c1 = std::min(cols, c0 + T);
      for (std::size_t c = c0; c < c1; ++c)
        for (std::size_t r = r0; r < r1; ++r) out(c, r) = w(r, c) * mask(r, c);
    }
  }
}

void add_row_bias(Matrix& m, std::span<const double> bias) {
  assert(bias.size() == m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double* row = m.data() + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += bias[c];
  }
}

void accumulate_col_sums(const Matrix& m, std::span<double> out) {
  assert(out.size() == m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.data() + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
}

namespace reference {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += a(i, k) * b(k, j);
      }
      c(i, j) = s;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols());
  for (std::size_t k = 0; k < a.cols(); ++k) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) {
        s += a(r, k) * b(r, j);
      }
      c(k, j) = s;
    }
  }
}

void masked_transpose(const Matrix& w, const Matrix& mask, Matrix& out) {
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) out(c, r) = w(r, c) * mask(r, c);
}

}  // namespace reference
}  // namespace prl::kernels
