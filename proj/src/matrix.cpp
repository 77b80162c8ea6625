#include "archetype/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "archetype/error.hpp"

namespace archetype {

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::abs_sum() const {
  double s = 0.0;
  for (double v : data_) s += std::fabs(v);
  return s;
}

double Matrix::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::min(m, v);
  return m;
}

double Matrix::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::max(m, v);
  return m;
}

double Matrix::column_norm(std::size_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double v = (*this)(i, j);
    s += v * v;
  }
  return std::sqrt(s);
}

namespace {

void require_inner(std::size_t a_cols, std::size_t b_rows, const char* op) {
  if (a_cols != b_rows) {
    std::ostringstream msg;
    msg << op << ": inner dimensions disagree (" << a_cols << " vs " << b_rows << ")";
    throw Error(msg.str());
  }
}

// One output row of a·b: c[j] = sum_k a_row[k] * b(k, j), k ascending.
void matmul_row(const double* a_row, const Matrix& b, double* c_row) {
  const std::size_t inner = b.rows();
  const std::size_t n = b.cols();
  std::fill(c_row, c_row + n, 0.0);
  for (std::size_t k = 0; k < inner; ++k) {
    const double a_ik = a_row[k];
    const double* b_row = b.row(k);
    for (std::size_t j = 0; j < n; ++j) c_row[j] += a_ik * b_row[j];
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b, unsigned threads) {
  require_inner(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  const std::size_t m = a.rows();
  if (threads <= 1 || m < 2) {
    for (std::size_t i = 0; i < m; ++i) matmul_row(a.row(i), b, c.row(i));
    return c;
  }
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(m));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < m; i += workers) matmul_row(a.row(i), b, c.row(i));
    });
  }
  for (auto& t : pool) t.join();
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require_inner(a.rows(), b.rows(), "matmul_tn");
  Matrix c(a.cols(), b.cols());
  const std::size_t m = a.cols();
  const std::size_t inner = a.rows();
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* c_row = c.row(i);
    for (std::size_t k = 0; k < inner; ++k) {
      const double a_ki = a(k, i);
      const double* b_row = b.row(k);
      for (std::size_t j = 0; j < n; ++j) c_row[j] += a_ki * b_row[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require_inner(a.cols(), b.cols(), "matmul_nt");
  Matrix c(a.rows(), b.rows());
  const std::size_t m = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const double* a_row = a.row(i);
    double* c_row = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double* b_row = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k) s += a_row[k] * b_row[k];
      c_row[j] = s;
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("subtract: shape mismatch");
  Matrix c(a.rows(), a.cols());
  auto av = a.values();
  auto bv = b.values();
  auto cv = c.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] = av[i] - bv[i];
  return c;
}

double spectral_norm(const Matrix& m, double tol, std::size_t max_iters) {
  if (m.empty() || !m.all_finite()) throw Error("spectral_norm: matrix must be finite and nonzero");
  if (m.frobenius_norm() == 0.0) throw Error("spectral_norm: matrix must be finite and nonzero");

  // Power iteration on the (small) Gram matrix mᵀm.
  const Matrix gram = matmul_tn(m, m);
  const std::size_t p = gram.rows();
  std::vector<double> v(p, 1.0 / std::sqrt(static_cast<double>(p)));
  std::vector<double> gv(p);
  double lambda = 0.0;
  // Rayleigh-quotient changes underestimate the remaining error, so stop
  // well below the requested tolerance.
  const double stop = tol / 16.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < p; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < p; ++j) s += gram(i, j) * v[j];
      gv[i] = s;
    }
    double lambda_next = 0.0;
    for (std::size_t i = 0; i < p; ++i) lambda_next += v[i] * gv[i];
    double norm = 0.0;
    for (double x : gv) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      // All-ones start landed in the null space; perturb one coordinate.
      v.assign(p, 0.0);
      v[it % p] = 1.0;
      continue;
    }
    for (std::size_t i = 0; i < p; ++i) v[i] = gv[i] / norm;
    if (it > 0 && std::fabs(lambda_next - lambda) <= stop * std::fabs(lambda_next)) {
      return std::sqrt(lambda_next);
    }
    lambda = lambda_next;
  }
  std::ostringstream msg;
  msg << "spectral_norm: no convergence after " << max_iters
      << " iterations; best estimate " << std::sqrt(std::fabs(lambda));
  throw Error(msg.str());
}

}  // namespace archetype
