#pragma once

#include <cmath>
#include <vector>

#include "hategraph/matrix.hpp"
#include "hategraph/rng.hpp"

// Shared neural-net kernels: seeded init, row-wise layer norm, activations.
namespace hategraph {

inline constexpr double kLayerNormEps = 1e-5;

inline void init_uniform(Matrix& m, int fan_in, double init_scale, Rng& rng) {
  const double s = init_scale / std::sqrt(static_cast<double>(fan_in));
  for (double& v : m.data) v = rng.uniform(-s, s);
}

// y = scale * (x - mean) / sqrt(var + eps) + offset, per row.
// xhat and invstd are cached for the backward pass.
inline Matrix layernorm_forward(const Matrix& x, const Matrix& scale, const Matrix& offset,
                                Matrix& xhat, std::vector<double>& invstd) {
  const int n = x.rows, d = x.cols;
  Matrix y(n, d);
  xhat = Matrix(n, d);
  invstd.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += xi[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = xi[j] - mean;
      var += c * c;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    invstd[i] = inv;
    for (int j = 0; j < d; ++j) {
      xhat(i, j) = (xi[j] - mean) * inv;
      y(i, j) = scale(0, j) * xhat(i, j) + offset(0, j);
    }
  }
  return y;
}

// Returns dx; accumulates dscale/doffset.
inline Matrix layernorm_backward(const Matrix& dy, const Matrix& xhat, const std::vector<double>& invstd,
                                 const Matrix& scale, Matrix& dscale, Matrix& doffset) {
  const int n = dy.rows, d = dy.cols;
  Matrix dx(n, d);
  for (int i = 0; i < n; ++i) {
    const double* dyi = dy.row(i);
    const double* xh = xhat.row(i);
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (int j = 0; j < d; ++j) {
      dscale(0, j) += dyi[j] * xh[j];
      doffset(0, j) += dyi[j];
      const double dxh = dyi[j] * scale(0, j);
      sum_dxhat += dxh;
      sum_dxhat_xhat += dxh * xh[j];
    }
    const double m1 = sum_dxhat / d;
    const double m2 = sum_dxhat_xhat / d;
    for (int j = 0; j < d; ++j) {
      const double dxh = dyi[j] * scale(0, j);
      dx(i, j) = invstd[i] * (dxh - m1 - xh[j] * m2);
    }
  }
  return dx;
}

// Exact GELU; smooth everywhere, which keeps central finite differences
// well-behaved at h = 1e-5.
inline double gelu(double z) { return 0.5 * z * (1.0 + std::erf(z * M_SQRT1_2)); }

inline double gelu_prime(double z) {
  const double phi = std::exp(-0.5 * z * z) * 0.3989422804014326779;  // 1/sqrt(2*pi)
  return 0.5 * (1.0 + std::erf(z * M_SQRT1_2)) + z * phi;
}

inline double elu(double z) { return z > 0.0 ? z : std::expm1(z); }
inline double elu_prime(double z) { return z > 0.0 ? 1.0 : std::exp(z); }

inline constexpr double kLeakySlope = 0.2;
inline double leaky_relu(double z) { return z > 0.0 ? z : kLeakySlope * z; }
inline double leaky_relu_prime(double z) { return z > 0.0 ? 1.0 : kLeakySlope; }

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace hategraph
