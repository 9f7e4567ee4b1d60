#include "numeric/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "errors.hpp"
#include "numeric/parallel.hpp"

namespace sf::numeric {
namespace {

std::size_t broadcast_outer(const Tensor& a, const Tensor& b, const char* op) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (bs.size() > as.size() || !std::equal(bs.rbegin(), bs.rend(), as.rbegin())) {
    throw InvalidArgument(std::string(op) + ": shape " + to_string(bs) +
                          " does not broadcast onto " + to_string(as));
  }
  return b.numel() == 0 ? 0 : a.numel() / b.numel();
}

void reduce_outer(std::span<const double> g, std::size_t outer, std::size_t inner,
                  std::vector<double>& dst) {
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = g.data() + o * inner;
    for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
  }
}

std::size_t last_dim(const Tensor& x, const char* op) {
  if (x.rank() == 0) throw InvalidArgument(std::string(op) + ": needs rank >= 1, got scalar");
  return x.shape().back();
}

// C[m,n] += A[m,k] B[k,n] for rows [r0, r1).
void gemm_nn(const double* a, const double* b, double* c, std::size_t r0, std::size_t r1,
             std::size_t k, std::size_t n) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// dA[m,k] += dC[m,n] B[k,n]^T for rows [r0, r1).
void gemm_nt(const double* dc, const double* b, double* da, std::size_t r0, std::size_t r1,
             std::size_t k, std::size_t n) {
  for (std::size_t i = r0; i < r1; ++i) {
    const double* grow = dc + i * n;
    double* arow = da + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
      arow[p] += acc;
    }
  }
}

// dB[k,n] += A[m,k]^T dC[m,n] for output rows p in [p0, p1).
void gemm_tn(const double* a, const double* dc, double* db, std::size_t m, std::size_t k,
             std::size_t n, std::size_t p0, std::size_t p1) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* grow = dc + i * n;
    for (std::size_t p = p0; p < p1; ++p) {
      const double av = arow[p];
      double* brow = db + p * n;
      for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
    }
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const std::size_t outer = broadcast_outer(a, b, "add");
  const std::size_t inner = b.numel();
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bv = b.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += bv[i];
  }
  return Tensor::from_op("add", a.shape(), std::move(out), {a, b},
                         [outer, inner](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           if (in[0]) {
                             auto& ga = *in[0];
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                           }
                           if (in[1]) reduce_outer(g, outer, inner, *in[1]);
                         });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const std::size_t outer = broadcast_outer(a, b, "sub");
  const std::size_t inner = b.numel();
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bv = b.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] -= bv[i];
  }
  return Tensor::from_op("sub", a.shape(), std::move(out), {a, b},
                         [outer, inner](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           if (in[0]) {
                             auto& ga = *in[0];
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                           }
                           if (in[1]) {
                             auto& gb = *in[1];
                             for (std::size_t o = 0; o < outer; ++o) {
                               for (std::size_t i = 0; i < inner; ++i) gb[i] -= g[o * inner + i];
                             }
                           }
                         });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const std::size_t outer = broadcast_outer(a, b, "mul");
  const std::size_t inner = b.numel();
  std::vector<double> out(a.numel());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] = av[o * inner + i] * bv[i];
  }
  return Tensor::from_op("mul", a.shape(), std::move(out), {a, b},
                         [a, b, outer, inner](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto av = a.data();
                           auto bv = b.data();
                           if (in[0]) {
                             auto& ga = *in[0];
                             for (std::size_t o = 0; o < outer; ++o) {
                               for (std::size_t i = 0; i < inner; ++i) ga[o * inner + i] += g[o * inner + i] * bv[i];
                             }
                           }
                           if (in[1]) {
                             auto& gb = *in[1];
                             for (std::size_t o = 0; o < outer; ++o) {
                               for (std::size_t i = 0; i < inner; ++i) gb[i] += g[o * inner + i] * av[o * inner + i];
                             }
                           }
                         });
}

Tensor div(const Tensor& a, const Tensor& b) {
  const std::size_t outer = broadcast_outer(a, b, "div");
  const std::size_t inner = b.numel();
  std::vector<double> out(a.numel());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] = av[o * inner + i] / bv[i];
  }
  return Tensor::from_op("div", a.shape(), std::move(out), {a, b},
                         [a, b, outer, inner](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto av = a.data();
                           auto bv = b.data();
                           for (std::size_t o = 0; o < outer; ++o) {
                             for (std::size_t i = 0; i < inner; ++i) {
                               const std::size_t idx = o * inner + i;
                               if (in[0]) (*in[0])[idx] += g[idx] / bv[i];
                               if (in[1]) (*in[1])[i] -= g[idx] * av[idx] / (bv[i] * bv[i]);
                             }
                           }
                         });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= s;
  return Tensor::from_op("scale", a.shape(), std::move(out), {a},
                         [s](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
                         });
}

Tensor add_scalar(const Tensor& a, double s) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v += s;
  return Tensor::from_op("add_scalar", a.shape(), std::move(out), {a},
                         [](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                         });
}

Tensor square(const Tensor& a) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= v;
  return Tensor::from_op("square", a.shape(), std::move(out), {a},
                         [a](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto av = a.data();
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * av[i] * g[i];
                         });
}

Tensor abs(const Tensor& a) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v = std::fabs(v);
  return Tensor::from_op("abs", a.shape(), std::move(out), {a},
                         [a](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto av = a.data();
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             ga[i] += (av[i] > 0.0 ? 1.0 : (av[i] < 0.0 ? -1.0 : 0.0)) * g[i];
                           }
                         });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return Tensor::from_op("sum", Shape{}, {total}, {a},
                         [](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           for (auto& v : *in[0]) v += g[0];
                         });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw InvalidArgument("mean: empty tensor");
  const double n = static_cast<double>(a.numel());
  double total = 0.0;
  for (double v : a.data()) total += v;
  return Tensor::from_op("mean", Shape{}, {total / n}, {a},
                         [n](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           for (auto& v : *in[0]) v += g[0] / n;
                         });
}

Tensor mean_lastdim(const Tensor& a) {
  const std::size_t len = last_dim(a, "mean_lastdim");
  if (len == 0) throw InvalidArgument("mean_lastdim: last axis is empty");
  const std::size_t rows = a.numel() / len;
  Shape shape(a.shape().begin(), a.shape().end() - 1);
  std::vector<double> out(rows, 0.0);
  auto av = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < len; ++j) s += av[r * len + j];
    out[r] = s / static_cast<double>(len);
  }
  return Tensor::from_op("mean_lastdim", std::move(shape), std::move(out), {a},
                         [rows, len](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto& ga = *in[0];
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t j = 0; j < len; ++j) ga[r * len + j] += g[r] / static_cast<double>(len);
                           }
                         });
}

Tensor var_lastdim(const Tensor& a) {
  const std::size_t len = last_dim(a, "var_lastdim");
  if (len == 0) throw InvalidArgument("var_lastdim: last axis is empty");
  const std::size_t rows = a.numel() / len;
  Shape shape(a.shape().begin(), a.shape().end() - 1);
  std::vector<double> means(rows), out(rows);
  auto av = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < len; ++j) s += av[r * len + j];
    means[r] = s / static_cast<double>(len);
    double q = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      const double d = av[r * len + j] - means[r];
      q += d * d;
    }
    out[r] = q / static_cast<double>(len);
  }
  return Tensor::from_op("var_lastdim", std::move(shape), std::move(out), {a},
                         [a, means, rows, len](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto av = a.data();
                           auto& ga = *in[0];
                           const double f = 2.0 / static_cast<double>(len);
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t j = 0; j < len; ++j) {
                               ga[r * len + j] += f * (av[r * len + j] - means[r]) * g[r];
                             }
                           }
                         });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.numel()) {
    throw InvalidArgument("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return Tensor::from_op("reshape", std::move(shape), std::move(out), {a},
                         [](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                         });
}

Tensor flatten(const Tensor& a, std::size_t start_axis) {
  if (start_axis >= a.rank()) {
    throw InvalidArgument("flatten: start axis " + std::to_string(start_axis) + " invalid for shape " +
                          to_string(a.shape()));
  }
  Shape shape(a.shape().begin(), a.shape().begin() + static_cast<std::ptrdiff_t>(start_axis));
  std::size_t tail = 1;
  for (std::size_t i = start_axis; i < a.rank(); ++i) tail *= a.shape()[i];
  shape.push_back(tail);
  return reshape(a, std::move(shape));
}

Tensor permute(const Tensor& a, const std::vector<std::size_t>& axes) {
  const std::size_t r = a.rank();
  std::vector<bool> used(r, false);
  bool ok = axes.size() == r;
  for (std::size_t ax : axes) {
    if (!ok || ax >= r || used[ax]) {
      ok = false;
      break;
    }
    used[ax] = true;
  }
  if (!ok) throw InvalidArgument("permute: invalid axis order for shape " + to_string(a.shape()));

  const Shape& in_shape = a.shape();
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(r);
  std::vector<std::size_t> src_stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = in_shape[axes[i]];
    src_stride[i] = in_strides[axes[i]];
  }
  // source offset of every output element
  const std::size_t n = a.numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(r, 0);
  std::size_t offset = 0;
  for (std::size_t lin = 0; lin < n; ++lin) {
    src[lin] = offset;
    for (std::size_t d = r; d-- > 0;) {
      ++idx[d];
      offset += src_stride[d];
      if (idx[d] < out_shape[d]) break;
      offset -= src_stride[d] * idx[d];
      idx[d] = 0;
    }
  }
  std::vector<double> out(n);
  auto av = a.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = av[src[i]];
  return Tensor::from_op("permute", std::move(out_shape), std::move(out), {a},
                         [src = std::move(src)](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) ga[src[i]] += g[i];
                         });
}

Tensor transpose(const Tensor& a) {
  if (a.rank() < 2) throw InvalidArgument("transpose: needs rank >= 2, got " + to_string(a.shape()));
  std::vector<std::size_t> axes(a.rank());
  std::iota(axes.begin(), axes.end(), 0);
  std::swap(axes[a.rank() - 1], axes[a.rank() - 2]);
  return permute(a, axes);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto mismatch = [&] {
    return InvalidArgument("matmul: incompatible shapes " + to_string(a.shape()) + " and " +
                           to_string(b.shape()));
  };
  if (a.rank() < 2 || b.rank() < 2) throw mismatch();
  const std::size_t m = a.size(-2);
  const std::size_t k = a.size(-1);
  const std::size_t n = b.size(-1);
  if (b.size(-2) != k) throw mismatch();
  const bool shared = b.rank() == 2;
  if (!shared && (b.rank() != a.rank() ||
                  !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin()))) {
    throw mismatch();
  }
  const std::size_t batch = a.numel() / (m * k);
  Shape out_shape(a.shape().begin(), a.shape().end() - 1);
  out_shape.push_back(n);
  std::vector<double> out(batch * m * n, 0.0);
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  double* cp = out.data();
  if (shared) {
    parallel_for(batch * m, k * n, [&](std::size_t r0, std::size_t r1) { gemm_nn(ap, bp, cp, r0, r1, k, n); });
  } else {
    parallel_for(batch, m * k * n, [&](std::size_t b0, std::size_t b1) {
      for (std::size_t t = b0; t < b1; ++t) gemm_nn(ap + t * m * k, bp + t * k * n, cp + t * m * n, 0, m, k, n);
    });
  }
  return Tensor::from_op(
      "matmul", std::move(out_shape), std::move(out), {a, b},
      [a, b, batch, m, k, n, shared](std::span<const double> g, std::span<std::vector<double>* const> in) {
        const double* ap = a.data().data();
        const double* bp = b.data().data();
        const double* gp = g.data();
        if (shared) {
          const std::size_t rows = batch * m;
          if (in[0]) {
            double* da = in[0]->data();
            parallel_for(rows, k * n, [&](std::size_t r0, std::size_t r1) { gemm_nt(gp, bp, da, r0, r1, k, n); });
          }
          if (in[1]) {
            double* db = in[1]->data();
            parallel_for(k, rows * n, [&](std::size_t p0, std::size_t p1) { gemm_tn(ap, gp, db, rows, k, n, p0, p1); });
          }
        } else {
          parallel_for(batch, m * k * n, [&](std::size_t b0, std::size_t b1) {
            for (std::size_t t = b0; t < b1; ++t) {
              if (in[0]) gemm_nt(gp + t * m * n, bp + t * k * n, in[0]->data() + t * m * k, 0, m, k, n);
              if (in[1]) gemm_tn(ap + t * m * k, gp + t * m * n, in[1]->data() + t * k * n, m, k, n, 0, k);
            }
          });
        }
      });
}

Tensor softmax(const Tensor& a) {
  const std::size_t len = last_dim(a, "softmax");
  const std::size_t rows = len == 0 ? 0 : a.numel() / len;
  std::vector<double> out(a.numel());
  auto av = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = av.data() + r * len;
    double* y = out.data() + r * len;
    const double mx = *std::max_element(x, x + len);
    double total = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      y[j] = std::exp(x[j] - mx);
      total += y[j];
    }
    for (std::size_t j = 0; j < len; ++j) y[j] /= total;
  }
  auto y = std::make_shared<std::vector<double>>(out);
  return Tensor::from_op("softmax", a.shape(), std::move(out), {a},
                         [y, rows, len](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto& ga = *in[0];
                           const auto& yv = *y;
                           for (std::size_t r = 0; r < rows; ++r) {
                             double dot = 0.0;
                             for (std::size_t j = 0; j < len; ++j) dot += g[r * len + j] * yv[r * len + j];
                             for (std::size_t j = 0; j < len; ++j) {
                               ga[r * len + j] += yv[r * len + j] * (g[r * len + j] - dot);
                             }
                           }
                         });
}

Tensor gelu(const Tensor& a) {
  std::vector<double> out(a.numel());
  auto av = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * normal_cdf(av[i]);
  return Tensor::from_op("gelu", a.shape(), std::move(out), {a},
                         [a](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto av = a.data();
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             ga[i] += g[i] * (normal_cdf(av[i]) + av[i] * normal_pdf(av[i]));
                           }
                         });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::from_op("relu", a.shape(), std::move(out), {a},
                         [a](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto av = a.data();
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             if (av[i] > 0.0) ga[i] += g[i];
                           }
                         });
}

Tensor activate(const Tensor& a, Activation act) {
  return act == Activation::kGelu ? gelu(a) : relu(a);
}

Tensor dropout(const Tensor& a, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw InvalidArgument("dropout: probability must be in [0, 1)");
  if (p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(a.numel());
  for (auto& m : mask) m = rng.bernoulli(p) ? 0.0 : keep_scale;
  std::vector<double> out(a.numel());
  auto av = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * mask[i];
  return Tensor::from_op("dropout", a.shape(), std::move(out), {a},
                         [mask = std::move(mask)](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto& ga = *in[0];
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
                         });
}

Tensor normalize_lastdim(const Tensor& x, double eps) {
  const std::size_t len = last_dim(x, "normalize_lastdim");
  const std::size_t rows = len == 0 ? 0 : x.numel() / len;
  std::vector<double> out(x.numel());
  std::vector<double> inv(rows);
  auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * len;
    double mu = 0.0;
    for (std::size_t j = 0; j < len; ++j) mu += row[j];
    mu /= static_cast<double>(len);
    double var = 0.0;
    for (std::size_t j = 0; j < len; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(len);
    inv[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < len; ++j) out[r * len + j] = (row[j] - mu) * inv[r];
  }
  auto y = std::make_shared<std::vector<double>>(out);
  return Tensor::from_op(
      "normalize_lastdim", x.shape(), std::move(out), {x},
      [y, inv = std::move(inv), rows, len](std::span<const double> g, std::span<std::vector<double>* const> in) {
        auto& gx = *in[0];
        const auto& yv = *y;
        const double n = static_cast<double>(len);
        for (std::size_t r = 0; r < rows; ++r) {
          double gm = 0.0, gy = 0.0;
          for (std::size_t j = 0; j < len; ++j) {
            gm += g[r * len + j];
            gy += g[r * len + j] * yv[r * len + j];
          }
          gm /= n;
          gy /= n;
          for (std::size_t j = 0; j < len; ++j) {
            gx[r * len + j] += inv[r] * (g[r * len + j] - gm - yv[r * len + j] * gy);
          }
        }
      });
}

Tensor normalize_columns(const Tensor& x, double eps, ColumnStats* stats) {
  const std::size_t cols = last_dim(x, "normalize_columns");
  const std::size_t rows = cols == 0 ? 0 : x.numel() / cols;
  if (rows == 0) throw InvalidArgument("normalize_columns: no rows in " + to_string(x.shape()));
  auto xv = x.data();
  std::vector<double> mu(cols, 0.0), var(cols, 0.0), inv(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) mu[c] += xv[r * cols + c];
  }
  for (auto& m : mu) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = xv[r * cols + c] - mu[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    var[c] /= static_cast<double>(rows);
    inv[c] = 1.0 / std::sqrt(var[c] + eps);
  }
  std::vector<double> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = (xv[r * cols + c] - mu[c]) * inv[c];
  }
  if (stats) *stats = ColumnStats{mu, var};
  auto y = std::make_shared<std::vector<double>>(out);
  return Tensor::from_op(
      "normalize_columns", x.shape(), std::move(out), {x},
      [y, inv = std::move(inv), rows, cols](std::span<const double> g, std::span<std::vector<double>* const> in) {
        auto& gx = *in[0];
        const auto& yv = *y;
        std::vector<double> gm(cols, 0.0), gy(cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            gm[c] += g[r * cols + c];
            gy[c] += g[r * cols + c] * yv[r * cols + c];
          }
        }
        const double n = static_cast<double>(rows);
        for (std::size_t c = 0; c < cols; ++c) {
          gm[c] /= n;
          gy[c] /= n;
        }
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            gx[r * cols + c] += inv[c] * (g[r * cols + c] - gm[c] - yv[r * cols + c] * gy[c]);
          }
        }
      });
}

Tensor normalize_columns_fixed(const Tensor& x, const std::vector<double>& mean,
                               const std::vector<double>& var, double eps) {
  const std::size_t cols = last_dim(x, "normalize_columns_fixed");
  if (mean.size() != cols || var.size() != cols) {
    throw InvalidArgument("normalize_columns_fixed: statistics length does not match " + to_string(x.shape()));
  }
  const std::size_t rows = cols == 0 ? 0 : x.numel() / cols;
  std::vector<double> inv(cols);
  for (std::size_t c = 0; c < cols; ++c) inv[c] = 1.0 / std::sqrt(var[c] + eps);
  std::vector<double> out(x.numel());
  auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = (xv[r * cols + c] - mean[c]) * inv[c];
  }
  return Tensor::from_op("normalize_columns_fixed", x.shape(), std::move(out), {x},
                         [inv = std::move(inv), rows, cols](std::span<const double> g,
                                                            std::span<std::vector<double>* const> in) {
                           auto& gx = *in[0];
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[r * cols + c] * inv[c];
                           }
                         });
}

Tensor unfold_lastdim(const Tensor& x, std::size_t size, std::size_t step) {
  const std::size_t len = last_dim(x, "unfold_lastdim");
  if (size == 0 || step == 0) throw InvalidArgument("unfold_lastdim: window size and step must be >= 1");
  if (size > len) {
    throw InvalidArgument("unfold_lastdim: window " + std::to_string(size) + " longer than axis " +
                          std::to_string(len));
  }
  const std::size_t windows = (len - size) / step + 1;
  const std::size_t rows = x.numel() / len;
  Shape shape(x.shape().begin(), x.shape().end() - 1);
  shape.push_back(windows);
  shape.push_back(size);
  std::vector<double> out(rows * windows * size);
  auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t w = 0; w < windows; ++w) {
      std::copy_n(xv.data() + r * len + w * step, size, out.data() + (r * windows + w) * size);
    }
  }
  return Tensor::from_op("unfold_lastdim", std::move(shape), std::move(out), {x},
                         [rows, len, windows, size, step](std::span<const double> g,
                                                          std::span<std::vector<double>* const> in) {
                           auto& gx = *in[0];
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t w = 0; w < windows; ++w) {
                               const double* src = g.data() + (r * windows + w) * size;
                               double* dst = gx.data() + r * len + w * step;
                               for (std::size_t j = 0; j < size; ++j) dst[j] += src[j];
                             }
                           }
                         });
}

Tensor affine_rows(const Tensor& x, const std::vector<double>& scale_by, const std::vector<double>& shift) {
  const std::size_t len = last_dim(x, "affine_rows");
  const std::size_t rows = len == 0 ? 0 : x.numel() / len;
  if (scale_by.size() != rows || shift.size() != rows) {
    throw InvalidArgument("affine_rows: " + std::to_string(rows) + " rows but " +
                          std::to_string(scale_by.size()) + " coefficients");
  }
  std::vector<double> out(x.numel());
  auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < len; ++j) out[r * len + j] = xv[r * len + j] * scale_by[r] + shift[r];
  }
  return Tensor::from_op("affine_rows", x.shape(), std::move(out), {x},
                         [scale_by, rows, len](std::span<const double> g, std::span<std::vector<double>* const> in) {
                           auto& gx = *in[0];
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t j = 0; j < len; ++j) gx[r * len + j] += g[r * len + j] * scale_by[r];
                           }
                         });
}

}  // namespace sf::numeric
