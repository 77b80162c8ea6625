#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "archetype/image.hpp"
#include "archetype/prng.hpp"
#include "archetype/solver.hpp"
#include "archetype/types.hpp"

namespace archetype {

struct EnsembleConfig {
  std::size_t runs = 50;  // M
  std::uint64_t base_seed = 0;
  std::vector<double> gamma_set{0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  double fit_slack = 1.05;
  // Template for the per-run solver; gamma and seed are filled per run
  // (seed of run m is base_seed + m).
  SolverConfig solver;
  // Worker threads for the run pool. 0 consults ARCHETYPE_THREADS, and an
  // unset or zero variable means the hardware thread count. Results do
  // not depend on this value.
  unsigned workers = 0;

  void validate() const;
};

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  double fit_l1 = 0.0;
  double coherence = 0.0;
  double wall_ms = 0.0;
  bool ok = false;
  std::string error;
};

struct SelectionReport {
  std::vector<RunRecord> per_run;
  std::vector<std::size_t> candidate_set;  // 𝓘, ascending run indices
  std::size_t selected = 0;
  double fit_min = 0.0;
};

// Entrywise ℓ1 norm of X − E·A.
double fit_l1(const HsiImage& x, const EndmemberMatrix& e, const AbundanceMatrix& a);

// Maximal pairwise inner product between endmember columns. The raw
// inner product is the selection criterion; `normalized` switches to the
// cosine variant and is off by default.
double coherence(const EndmemberMatrix& e, bool normalized = false);

// Uniform choice over the step-factor set: index = floor(u·|S|).
double sample_gamma(Prng& rng, const std::vector<double>& gamma_set);

// The selection rule applied to measured per-run records: keep runs with
// fit ≤ fit_slack · fit_min, pick the lowest coherence among them, break
// ties toward the lowest run index. Failed runs never enter the pool.
SelectionReport select_runs(std::vector<RunRecord> per_run, double fit_slack);

// Runs M seeded solver instances (concurrently, deterministically) and
// applies the selection rule. Failed runs are recorded and skipped; only
// if every run fails is an error thrown.
std::pair<RunResult, SelectionReport> run_ensemble(const HsiImage& x,
                                                   const EnsembleConfig& config);

// Effective worker count: `requested`, or ARCHETYPE_THREADS, or the
// hardware default.
unsigned resolve_workers(unsigned requested);

}  // namespace archetype
