#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace archetype {

// Dense row-major matrix of doubles. Deliberately small: the solver only
// needs products, norms, and elementwise traversal.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  bool all_finite() const;
  double frobenius_norm() const;
  double abs_sum() const;
  double min_value() const;
  double max_value() const;
  double column_norm(std::size_t j) const;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense products. Accumulation runs over the inner index in ascending
// order for every output entry, and each output row is owned by a single
// worker, so results are bitwise independent of `threads`.
Matrix matmul(const Matrix& a, const Matrix& b, unsigned threads = 1);
// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a·bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix subtract(const Matrix& a, const Matrix& b);

// Largest singular value via power iteration on mᵀm, all-ones start
// vector. Throws if the iteration has not reached `tol` relative accuracy
// after `max_iters` sweeps (the message carries the best estimate).
double spectral_norm(const Matrix& m, double tol = 1e-6, std::size_t max_iters = 1000);

}  // namespace archetype
