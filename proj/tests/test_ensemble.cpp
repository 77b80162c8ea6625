#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"

#include "archetype/ensemble.hpp"
#include "archetype/error.hpp"
#include "archetype/matrix.hpp"
#include "archetype/prng.hpp"

using namespace archetype;

namespace {

HsiImage random_image(std::size_t l, std::size_t n, std::uint64_t seed) {
  Prng rng(seed);
  HsiImage image;
  image.data = Matrix(l, n);
  for (double& v : image.data.values()) v = rng.next_unit();
  return image;
}

RunRecord record(std::size_t index, double fit, double coherence, bool ok = true) {
  RunRecord rec;
  rec.index = index;
  rec.seed = index;
  rec.gamma = 1.0;
  rec.fit_l1 = fit;
  rec.coherence = coherence;
  rec.ok = ok;
  return rec;
}

}  // namespace

TEST_CASE("selection keeps near-best fits and picks the least coherent") {
  // Hand trace: fit_min = 10.0, cutoff 10.5 admits runs 0 and 1; run 1 has
  // the lower coherence.
  std::vector<RunRecord> runs{record(0, 10.0, 0.9), record(1, 10.4, 0.8), record(2, 11.0, 0.1)};
  const SelectionReport report = select_runs(runs, 1.05);
  CHECK(report.fit_min == 10.0);
  CHECK(report.candidate_set == std::vector<std::size_t>{0, 1});
  CHECK(report.selected == 1);
}

TEST_CASE("selection tie-breaks toward the lowest run index") {
  std::vector<RunRecord> runs{record(0, 10.0, 0.5), record(1, 10.1, 0.5), record(2, 10.2, 0.5)};
  const SelectionReport report = select_runs(runs, 1.05);
  CHECK(report.candidate_set == std::vector<std::size_t>{0, 1, 2});
  CHECK(report.selected == 0);
}

TEST_CASE("selection skips failed runs entirely") {
  std::vector<RunRecord> runs{record(0, 1.0, 0.0, false), record(1, 10.0, 0.9),
                              record(2, 10.2, 0.3)};
  const SelectionReport report = select_runs(runs, 1.05);
  CHECK(report.fit_min == 10.0);
  CHECK(report.candidate_set == std::vector<std::size_t>{1, 2});
  CHECK(report.selected == 2);

  std::vector<RunRecord> all_failed{record(0, 1.0, 0.0, false)};
  CHECK_THROWS_AS(select_runs(all_failed, 1.05), Error);
}

TEST_CASE("gamma sampling covers the set uniformly and deterministically") {
  const std::vector<double> set{0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

  // floor(u·7) with the first seed-0 uniform 0.8833… → index 6.
  Prng rng(0);
  CHECK(sample_gamma(rng, set) == 8.0);
  // Second uniform 0.4315… → index 3.
  CHECK(sample_gamma(rng, set) == 1.0);

  Prng mc(123);
  std::vector<int> counts(set.size(), 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const double g = sample_gamma(mc, set);
    const auto it = std::find(set.begin(), set.end(), g);
    REQUIRE(it != set.end());
    ++counts[static_cast<std::size_t>(it - set.begin())];
  }
  for (int c : counts) {
    CHECK(c > draws / 7 - 600);
    CHECK(c < draws / 7 + 600);
  }
}

TEST_CASE("coherence is the worst pairwise inner product") {
  Matrix e(3, 3, 0.0);
  e(0, 0) = 1.0;            // e1 = (1,0,0)
  e(1, 1) = 1.0;            // e2 = (0,1,0)
  e(0, 2) = 0.6;            // e3 = (0.6, 0.8, 0)
  e(1, 2) = 0.8;
  const EndmemberMatrix em{e};
  CHECK(coherence(em) == doctest::Approx(0.8).epsilon(1e-12));

  // Scaling a column scales raw coherence but not the cosine variant.
  Matrix scaled = e;
  for (std::size_t i = 0; i < 3; ++i) scaled(i, 2) *= 2.0;
  CHECK(coherence({scaled}) == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(coherence({scaled}, true) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("fit_l1 is the entrywise residual sum") {
  HsiImage x;
  x.data = Matrix(2, 2);
  x.data(0, 0) = 1.0;
  x.data(1, 1) = 1.0;
  const EndmemberMatrix e{Matrix::identity(2)};
  const AbundanceMatrix a{Matrix(2, 2, 0.5)};
  // Recon is all 0.5; each entry misses by 0.5.
  CHECK(fit_l1(x, e, a) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ensemble runs are deterministic and seeded by base + index") {
  const HsiImage x = random_image(6, 40, 77);
  EnsembleConfig config;
  config.runs = 4;
  config.base_seed = 5;
  config.solver.endmembers = 2;
  config.solver.outer_iters = 6;
  config.workers = 1;

  auto [result1, report1] = run_ensemble(x, config);
  REQUIRE(report1.per_run.size() == 4);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(report1.per_run[m].seed == 5 + m);
    CHECK(report1.per_run[m].ok);
    CHECK(report1.per_run[m].fit_l1 > 0.0);
  }
  CHECK(result1.seed == report1.per_run[report1.selected].seed);
  CHECK(result1.gamma == report1.per_run[report1.selected].gamma);

  config.workers = 3;
  auto [result2, report2] = run_ensemble(x, config);
  CHECK(result1.abundances.data == result2.abundances.data);
  CHECK(result1.endmembers.data == result2.endmembers.data);
  CHECK(report1.selected == report2.selected);
  CHECK(report1.candidate_set == report2.candidate_set);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(report1.per_run[m].gamma == report2.per_run[m].gamma);
    CHECK(report1.per_run[m].fit_l1 == report2.per_run[m].fit_l1);
    CHECK(report1.per_run[m].coherence == report2.per_run[m].coherence);
  }
}

TEST_CASE("selected run replays bitwise from its recorded seed and gamma") {
  const HsiImage x = random_image(5, 30, 13);
  EnsembleConfig config;
  config.runs = 3;
  config.base_seed = 100;
  config.solver.endmembers = 2;
  config.solver.outer_iters = 5;
  config.workers = 1;

  auto [selected, report] = run_ensemble(x, config);
  SolverConfig replay = config.solver;
  replay.seed = report.per_run[report.selected].seed;
  replay.gamma = report.per_run[report.selected].gamma;
  const RunResult again = run(x, replay);
  CHECK(again.abundances.data == selected.abundances.data);
  CHECK(again.contributions.data == selected.contributions.data);
  CHECK(again.endmembers.data == selected.endmembers.data);
  CHECK(again.fit_l1 == selected.fit_l1);
  CHECK(again.coherence == selected.coherence);
}

TEST_CASE("worker resolution prefers explicit counts, then the environment") {
  CHECK(resolve_workers(3) == 3);

  ::setenv("ARCHETYPE_THREADS", "5", 1);
  CHECK(resolve_workers(0) == 5);
  ::setenv("ARCHETYPE_THREADS", "not-a-number", 1);
  CHECK(resolve_workers(0) >= 1);  // falls back to the hardware default
  ::unsetenv("ARCHETYPE_THREADS");
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("ensemble config validation") {
  EnsembleConfig config;
  config.solver.endmembers = 2;
  CHECK_NOTHROW(config.validate());
  config.runs = 0;
  CHECK_THROWS_AS(config.validate(), Error);
  config.runs = 1;
  config.gamma_set = {};
  CHECK_THROWS_AS(config.validate(), Error);
  config.gamma_set = {0.5, -1.0};
  CHECK_THROWS_AS(config.validate(), Error);
  config.gamma_set = {0.5};
  config.fit_slack = 0.9;
  CHECK_THROWS_AS(config.validate(), Error);
}
