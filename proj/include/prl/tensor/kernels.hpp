#pragma once

#include <span>

#include "prl/tensor/matrix.hpp"

// Hot inner loops of the training step. The default versions are OpenMP
// parallel over output rows; `reference` holds the plain serial loops they
// are tested against. Each output entry is accumulated in a fixed order, so
// results do not depend on the thread count; they can differ from the
// reference in the last bits where the compiler fuses multiply-adds.
//
// Shapes are the caller's responsibility (checked with assert only).
namespace prl::kernels {

/// c = a * b. a: MxK, b: KxN, c: MxN (overwritten).
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);

/// c = a^T * b. a: MxK, b: MxN, c: KxN (overwritten).
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);

/// out = (w .* mask)^T. w, mask: RxC, out: CxR (overwritten).
void masked_transpose(const Matrix& w, const Matrix& mask, Matrix& out);

/// Adds `bias` to every row of `m`.
void add_row_bias(Matrix& m, std::span<const double> bias);

/// out[j] += sum_i m(i, j).
void accumulate_col_sums(const Matrix& m, std::span<double> out);

namespace reference {
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
void masked_transpose(const Matrix& w, const Matrix& mask, Matrix& out);
}  // namespace reference

}  // namespace prl::kernels
