#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "archetype/image.hpp"
#include "archetype/matrix.hpp"
#include "archetype/prng.hpp"
#include "archetype/types.hpp"

namespace archetype {

struct SolverConfig {
  std::size_t endmembers = 0;     // p
  std::size_t outer_iters = 100;  // T
  std::size_t inner_iters_a = 5;  // K1
  std::size_t inner_iters_b = 5;  // K2
  double gamma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Output of one solver run. Endmembers are X·B of the final contribution
// matrix; the objective trace holds ½‖X − XBA‖² at initialization and
// after each outer iteration.
struct RunResult {
  EndmemberMatrix endmembers;
  AbundanceMatrix abundances;
  ContributionMatrix contributions;
  double fit_l1 = 0.0;
  double coherence = 0.0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  std::vector<double> objective_trace;
};

// Uniform 1/p start: the maximum-entropy point of every pixel's simplex.
AbundanceMatrix init_abundances(std::size_t p, std::size_t n);

// Near-uniform start with a small random perturbation so the columns are
// not permutation-symmetric: column j is softmax(0.1·u) with fresh
// uniform draws per column (columns drawn in order, entries top to bottom).
ContributionMatrix init_contributions(std::size_t n, std::size_t p, Prng& rng);

struct StepSizes {
  double eta_a = 0.0;  // γ / σ_max(X·B0)²
  double eta_b = 0.0;  // √(p/N) · eta_a
};
StepSizes step_sizes(const HsiImage& x, const ContributionMatrix& b0, double gamma);

// One entropic descent step on the simplex: softmax(log z − η·grad).
// Entries of z below 1e-30 are lifted to 1e-30 before the logarithm.
std::vector<double> entropic_step(std::span<const double> z, std::span<const double> grad,
                                  double eta);

// ∇_A ½‖X − XBA‖² = −(XB)ᵀ(X − XBA), shape p×N.
Matrix grad_abundances(const HsiImage& x, const ContributionMatrix& b, const AbundanceMatrix& a);

// ∇_B ½‖X − XBA‖² = −Xᵀ(X − XBA)Aᵀ, shape N×p. The product is grouped as
// Xᵀ((X − XBA)Aᵀ) so no N×N intermediate is ever formed.
Matrix grad_contributions(const HsiImage& x, const ContributionMatrix& b,
                          const AbundanceMatrix& a);

double objective_l2(const HsiImage& x, const ContributionMatrix& b, const AbundanceMatrix& a);

// Snapshot handed to the observer after each inner iteration.
struct InnerStep {
  std::size_t outer = 0;  // 1-based outer iteration
  char block = 'A';       // which factor was just updated
  std::size_t inner = 0;  // 1-based inner iteration
  const Matrix& abundances;
  const Matrix& contributions;
};
using StepObserver = std::function<void(const InnerStep&)>;

// The full alternating entropic-descent loop. Deterministic in
// (x, config): the same inputs produce bitwise-identical results.
RunResult run(const HsiImage& x, const SolverConfig& config, const StepObserver& observer = {});

// Abundance estimation with fixed endmembers: entropic descent on
// ½‖X − EA‖² from the uniform start, `iters` steps of size `eta`.
AbundanceMatrix estimate_abundances(const HsiImage& x, const EndmemberMatrix& e,
                                    std::size_t iters, double eta);

}  // namespace archetype
