#include "archetype/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "archetype/ensemble.hpp"
#include "archetype/error.hpp"

namespace archetype {

namespace {

constexpr double kLogFloor = 1e-30;

// z ← softmax(log(max(z, 1e-30)) + step), both possibly strided. This is
// the one place entropic updates happen; the vector op and the columnwise
// matrix driver share it so their arithmetic is identical.
void entropic_apply(double* z, std::size_t z_stride, const double* step, std::size_t step_stride,
                    std::size_t d, std::vector<double>& scratch) {
  scratch.resize(d);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d; ++i) {
    const double zi = std::max(z[i * z_stride], kLogFloor);
    const double s = std::log(zi) + step[i * step_stride];
    scratch[i] = s;
    top = std::max(top, s);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    scratch[i] = std::exp(scratch[i] - top);
    total += scratch[i];
  }
  for (std::size_t i = 0; i < d; ++i) z[i * z_stride] = scratch[i] / total;
}

// Applies the entropic update to every column of z, reading the already
// scaled step (−η·gradient) from the same position in `step`.
void entropic_update_columns(Matrix& z, const Matrix& step, std::vector<double>& scratch) {
  const std::size_t d = z.rows();
  const std::size_t n = z.cols();
  for (std::size_t j = 0; j < n; ++j) {
    entropic_apply(z.values().data() + j, n, step.values().data() + j, n, d, scratch);
  }
}

void scale_in_place(Matrix& m, double factor) {
  for (double& v : m.values()) v *= factor;
}

// X − XB·A given a current XB.
Matrix residual(const Matrix& x, const Matrix& xb, const Matrix& a) {
  return subtract(x, matmul(xb, a));
}

double half_squared_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return 0.5 * s;
}

// Simplex and finiteness check after every inner update; a violation here
// means the iterate blew up (typically NaN from an infinite gradient).
void check_iterate(const Matrix& m, std::size_t outer, const char* which) {
  const std::size_t d = m.rows();
  const std::size_t n = m.cols();
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double v = m(i, j);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite " << which << " iterate at outer iteration " << outer;
        throw Error(msg.str());
      }
      if (v < 0.0) {
        std::ostringstream msg;
        msg << which << " iterate left the simplex at outer iteration " << outer;
        throw Error(msg.str());
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << which << " column sum drifted from 1 at outer iteration " << outer;
      throw Error(msg.str());
    }
  }
}

void require_shapes(const HsiImage& x, const Matrix& b, const Matrix& a, const char* op) {
  if (b.rows() != x.pixels() || a.cols() != x.pixels() || b.cols() != a.rows()) {
    std::ostringstream msg;
    msg << op << ": shape mismatch (X " << x.bands() << "x" << x.pixels() << ", B " << b.rows()
        << "x" << b.cols() << ", A " << a.rows() << "x" << a.cols() << ")";
    throw Error(msg.str());
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (endmembers < 2) throw Error("solver config: endmember count must be at least 2");
  if (outer_iters < 1 || inner_iters_a < 1 || inner_iters_b < 1) {
    throw Error("solver config: iteration counts must be at least 1");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error("solver config: step factor gamma must be positive");
  }
}

AbundanceMatrix init_abundances(std::size_t p, std::size_t n) {
  if (p < 2 || n < 1) throw Error("init_abundances: need p >= 2 and n >= 1");
  return {Matrix(p, n, 1.0 / static_cast<double>(p))};
}

ContributionMatrix init_contributions(std::size_t n, std::size_t p, Prng& rng) {
  if (n < 1 || p < 2) throw Error("init_contributions: need n >= 1 and p >= 2");
  Matrix b(n, p);
  std::vector<double> scores(n);
  for (std::size_t j = 0; j < p; ++j) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = 0.1 * rng.next_unit();
      top = std::max(top, scores[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::exp(scores[i] - top);
      total += scores[i];
    }
    for (std::size_t i = 0; i < n; ++i) b(i, j) = scores[i] / total;
  }
  return {b};
}

StepSizes step_sizes(const HsiImage& x, const ContributionMatrix& b0, double gamma) {
  if (!(gamma > 0.0)) throw Error("step_sizes: gamma must be positive");
  const Matrix xb = matmul(x.data, b0.data);
  if (xb.frobenius_norm() == 0.0) throw Error("degenerate initialization: X·B0 is zero");
  const double sigma = spectral_norm(xb);
  StepSizes eta;
  eta.eta_a = gamma / (sigma * sigma);
  eta.eta_b = std::sqrt(static_cast<double>(b0.endmember_count()) /
                        static_cast<double>(b0.pixel_count())) *
              eta.eta_a;
  return eta;
}

std::vector<double> entropic_step(std::span<const double> z, std::span<const double> grad,
                                  double eta) {
  if (z.size() != grad.size() || z.empty()) throw Error("entropic_step: size mismatch");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error("entropic_step: eta must be positive");
  std::vector<double> step(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(grad[i])) throw Error("entropic_step: non-finite gradient");
    step[i] = -eta * grad[i];
  }
  std::vector<double> out(z.begin(), z.end());
  std::vector<double> scratch;
  entropic_apply(out.data(), 1, step.data(), 1, out.size(), scratch);
  return out;
}

Matrix grad_abundances(const HsiImage& x, const ContributionMatrix& b, const AbundanceMatrix& a) {
  require_shapes(x, b.data, a.data, "grad_abundances");
  const Matrix xb = matmul(x.data, b.data);
  Matrix g = matmul_tn(xb, residual(x.data, xb, a.data));
  scale_in_place(g, -1.0);
  return g;
}

Matrix grad_contributions(const HsiImage& x, const ContributionMatrix& b,
                          const AbundanceMatrix& a) {
  require_shapes(x, b.data, a.data, "grad_contributions");
  const Matrix xb = matmul(x.data, b.data);
  const Matrix r_at = matmul_nt(residual(x.data, xb, a.data), a.data);  // L×p
  Matrix g = matmul_tn(x.data, r_at);                                   // N×p
  scale_in_place(g, -1.0);
  return g;
}

double objective_l2(const HsiImage& x, const ContributionMatrix& b, const AbundanceMatrix& a) {
  require_shapes(x, b.data, a.data, "objective_l2");
  const Matrix xb = matmul(x.data, b.data);
  return half_squared_norm(residual(x.data, xb, a.data));
}

RunResult run(const HsiImage& x, const SolverConfig& config, const StepObserver& observer) {
  config.validate();
  x.validate();
  const std::size_t n = x.pixels();
  const std::size_t p = config.endmembers;

  Matrix a = init_abundances(p, n).data;
  Prng rng(config.seed);
  Matrix b = init_contributions(n, p, rng).data;
  const StepSizes eta = step_sizes(x, {b}, config.gamma);

  RunResult result;
  result.seed = config.seed;
  result.gamma = config.gamma;

  Matrix xb = matmul(x.data, b);
  result.objective_trace.push_back(half_squared_norm(residual(x.data, xb, a)));

  std::vector<double> scratch;
  for (std::size_t t = 1; t <= config.outer_iters; ++t) {
    // B is fixed throughout this block, so XB is computed once; the
    // residual moves with every A update and is recomputed each step.
    for (std::size_t k = 1; k <= config.inner_iters_a; ++k) {
      Matrix g = matmul_tn(xb, residual(x.data, xb, a));  // (XB)ᵀR = −∇_A
      scale_in_place(g, eta.eta_a);
      entropic_update_columns(a, g, scratch);
      check_iterate(a, t, "abundance");
      if (observer) observer({t, 'A', k, a, b});
    }
    for (std::size_t k = 1; k <= config.inner_iters_b; ++k) {
      if (k > 1) xb = matmul(x.data, b);
      const Matrix r_at = matmul_nt(residual(x.data, xb, a), a);  // L×p
      Matrix g = matmul_tn(x.data, r_at);                         // Xᵀ(RAᵀ) = −∇_B
      scale_in_place(g, eta.eta_b);
      entropic_update_columns(b, g, scratch);
      check_iterate(b, t, "contribution");
      if (observer) observer({t, 'B', k, a, b});
    }
    xb = matmul(x.data, b);
    result.objective_trace.push_back(half_squared_norm(residual(x.data, xb, a)));
  }

  result.endmembers = {xb};  // Ê = X·B̂
  result.abundances = {std::move(a)};
  result.contributions = {std::move(b)};
  result.fit_l1 = fit_l1(x, result.endmembers, result.abundances);
  result.coherence = coherence(result.endmembers);
  return result;
}

AbundanceMatrix estimate_abundances(const HsiImage& x, const EndmemberMatrix& e,
                                    std::size_t iters, double eta) {
  if (!x.data.all_finite() || !e.data.all_finite()) {
    throw Error("estimate_abundances: non-finite input");
  }
  if (e.bands() != x.bands()) throw Error("estimate_abundances: band count mismatch");
  if (e.count() < 1) throw Error("estimate_abundances: need at least one endmember");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error("estimate_abundances: eta must be positive");

  const std::size_t p = e.count();
  const std::size_t n = x.pixels();
  Matrix a(p, n, 1.0 / static_cast<double>(p));
  std::vector<double> scratch;
  for (std::size_t it = 0; it < iters; ++it) {
    Matrix g = matmul_tn(e.data, subtract(x.data, matmul(e.data, a)));  // Eᵀ(X−EA) = −∇
    scale_in_place(g, eta);
    entropic_update_columns(a, g, scratch);
  }
  return {a};
}

}  // namespace archetype
