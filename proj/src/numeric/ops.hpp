#pragma once

#include <cstddef>
#include <vector>

#include "numeric/random.hpp"
#include "numeric/tensor.hpp"

namespace sf::numeric {

enum class Activation { kGelu, kRelu };

// Elementwise binary ops. `b` must have the same shape as `a` or a shape equal
// to a trailing slice of `a`'s shape (including the empty shape), in which
// case it is broadcast over the leading axes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor square(const Tensor& a);
Tensor abs(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Reductions over the last axis; the result drops that axis.
Tensor mean_lastdim(const Tensor& a);
Tensor var_lastdim(const Tensor& a);  // population variance

Tensor reshape(const Tensor& a, Shape shape);
// Merges axes [start_axis, rank) into one.
Tensor flatten(const Tensor& a, std::size_t start_axis);
Tensor permute(const Tensor& a, const std::vector<std::size_t>& axes);
// Swaps the last two axes.
Tensor transpose(const Tensor& a);

// a: [..., m, k]. b: [k, n] (shared across the leading axes of a) or
// [..., k, n] with the same leading axes as a.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor softmax(const Tensor& a);  // over the last axis
Tensor gelu(const Tensor& a);     // exact erf form
Tensor relu(const Tensor& a);
Tensor activate(const Tensor& a, Activation act);

// Inverted dropout: zeroes each element with probability p and scales the
// survivors by 1/(1-p). Identity when p == 0.
Tensor dropout(const Tensor& a, double p, Rng& rng);

// Zero-mean, unit-variance along the last axis of every row.
Tensor normalize_lastdim(const Tensor& x, double eps);

// Batch statistics of a [..., C] tensor per feature C, over all leading axes.
struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> var;  // population
};

// Normalizes every feature column with its batch statistics (training-mode
// batch norm without the affine part). Statistics are written to `stats` if
// given.
Tensor normalize_columns(const Tensor& x, double eps, ColumnStats* stats = nullptr);

// (x - mean[c]) / sqrt(var[c] + eps) with constant statistics.
Tensor normalize_columns_fixed(const Tensor& x, const std::vector<double>& mean,
                               const std::vector<double>& var, double eps);

// x: [..., L] -> [..., n, size] with n = (L - size) / step + 1 windows; window
// i covers [i*step, i*step + size).
Tensor unfold_lastdim(const Tensor& x, std::size_t size, std::size_t step);

// Per-row affine map with constant coefficients: x [R, L] -> x*scale[r] + shift[r].
Tensor affine_rows(const Tensor& x, const std::vector<double>& scale, const std::vector<double>& shift);

}  // namespace sf::numeric
