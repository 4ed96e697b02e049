#pragma once

#include <functional>
#include <span>
#include <vector>

#include "prl/tensor/matrix.hpp"

namespace prl {

/// Singular values of `m`, descending, via one-sided Jacobi rotations.
/// Intended for matrices up to 1024 on a side. Throws std::domain_error on
/// non-finite input and std::invalid_argument when a side exceeds 1024.
std::vector<double> svd_values(const Matrix& m);

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central-difference gradient of `f` at `at` with step `h`.
std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> at, double h);

}  // namespace prl
