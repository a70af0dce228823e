#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace hategraph {

// Dense row-major matrix of doubles. All model tensors use this type;
// vectors (biases, layer-norm scales) are stored as 1 x n matrices.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  double* row(int i) { return data.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

  size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

// Integer matrix, used for clamped pairwise tree distances.
struct IntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> data;

  IntMatrix() = default;
  IntMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0) {}

  int& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  int operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

inline bool all_finite(const Matrix& m) {
  for (double v : m.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// c = a * b
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols == b.rows);
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = ai[k];
      const double* bk = b.row(k);
      for (int j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

// c = a * b^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  assert(a.cols == b.cols);
  Matrix c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  return c;
}

// c = a^T * b
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  assert(a.rows == b.rows);
  Matrix c(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* ak = a.row(k);
    const double* bk = b.row(k);
    for (int i = 0; i < a.cols; ++i) {
      const double aki = ak[i];
      double* ci = c.row(i);
      for (int j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

inline void add_inplace(Matrix& a, const Matrix& b) {
  assert(a.same_shape(b));
  for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

// Adds a 1 x cols bias row to every row of a.
inline void add_row_inplace(Matrix& a, const Matrix& bias) {
  assert(bias.rows == 1 && bias.cols == a.cols);
  for (int i = 0; i < a.rows; ++i) {
    double* ai = a.row(i);
    for (int j = 0; j < a.cols; ++j) ai[j] += bias(0, j);
  }
}

// Returns the 1 x cols column-sum of a (gradient of a broadcast bias).
inline Matrix col_sums(const Matrix& a) {
  Matrix s(1, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    for (int j = 0; j < a.cols; ++j) s(0, j) += ai[j];
  }
  return s;
}

}  // namespace hategraph
