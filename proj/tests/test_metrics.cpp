#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "archetype/error.hpp"
#include "archetype/metrics.hpp"
#include "archetype/prng.hpp"
#include "archetype/synth.hpp"

using namespace archetype;

namespace {

EndmemberMatrix random_spectra(std::size_t l, std::size_t p, std::uint64_t seed) {
  Prng rng(seed);
  Matrix e(l, p);
  for (double& v : e.values()) v = 0.05 + rng.next_unit();
  return {e};
}

EndmemberMatrix shuffle_columns(const EndmemberMatrix& e, const std::vector<std::size_t>& order) {
  Matrix out(e.bands(), e.count());
  for (std::size_t j = 0; j < e.count(); ++j)
    for (std::size_t i = 0; i < e.bands(); ++i) out(i, j) = e.data(i, order[j]);
  return {out};
}

}  // namespace

TEST_CASE("spectral angle endpoints and scale invariance") {
  Matrix a(2, 1);
  a(0, 0) = 1.0;
  Matrix b(2, 1);
  b(1, 0) = 1.0;
  CHECK(spectral_angle_deg(a, 0, b, 0) == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(spectral_angle_deg(a, 0, a, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  Matrix c(2, 1, 1.0 / std::sqrt(2.0));
  CHECK(spectral_angle_deg(a, 0, c, 0) == doctest::Approx(45.0).epsilon(1e-12));

  Matrix d(3, 2);
  d(0, 0) = 1.0; d(1, 0) = 2.0; d(2, 0) = 3.0;
  d(0, 1) = 3.0; d(1, 1) = 2.0; d(2, 1) = 1.0;
  CHECK(spectral_angle_deg(d, 0, d, 1) == doctest::Approx(44.415308597192976).epsilon(1e-12));
  // Positive rescaling changes nothing.
  Matrix d2 = d;
  for (std::size_t i = 0; i < 3; ++i) d2(i, 1) *= 17.5;
  CHECK(spectral_angle_deg(d, 0, d2, 1) ==
        doctest::Approx(spectral_angle_deg(d, 0, d, 1)).epsilon(1e-12));

  Matrix zero(2, 1, 0.0);
  CHECK_THROWS_WITH_AS(spectral_angle_deg(a, 0, zero, 0), "SAD undefined for zero spectrum", Error);
}

TEST_CASE("rmse closed-form examples") {
  AbundanceMatrix one{Matrix(1, 1, 1.0)};
  AbundanceMatrix half{Matrix(1, 1, 0.5)};
  CHECK(rmse_percent(one, half) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(rmse_percent(one, one) == 0.0);

  AbundanceMatrix gt{Matrix(2, 2)};
  gt.data(0, 0) = 0.2; gt.data(0, 1) = 0.7;
  gt.data(1, 0) = 0.8; gt.data(1, 1) = 0.3;
  AbundanceMatrix est{Matrix(2, 2)};
  est.data(0, 0) = 0.25; est.data(0, 1) = 0.6;
  est.data(1, 0) = 0.75; est.data(1, 1) = 0.4;
  CHECK(rmse_percent(gt, est) == doctest::Approx(7.905694150420948).epsilon(1e-12));

  const std::vector<double> per = rmse_per_endmember(gt, est);
  CHECK(per[0] == doctest::Approx(7.9056941504209455).epsilon(1e-12));
  CHECK(per[1] == doctest::Approx(7.905694150420952).epsilon(1e-12));

  AbundanceMatrix wrong{Matrix(2, 3, 0.5)};
  CHECK_THROWS_AS(rmse_percent(gt, wrong), Error);
}

TEST_CASE("overall rmse is the root mean of squared per-endmember values") {
  Prng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t p = 2 + static_cast<std::size_t>(rng.next_unit() * 4.0);
    const std::size_t n = 5 + static_cast<std::size_t>(rng.next_unit() * 20.0);
    AbundanceMatrix gt{Matrix(p, n)}, est{Matrix(p, n)};
    for (std::size_t j = 0; j < n; ++j) {
      auto cg = dirichlet_column(rng, p, 1.0);
      auto ce = dirichlet_column(rng, p, 1.0);
      for (std::size_t i = 0; i < p; ++i) {
        gt.data(i, j) = cg[i];
        est.data(i, j) = ce[i];
      }
    }
    const std::vector<double> per = rmse_per_endmember(gt, est);
    double mean_sq = 0.0;
    for (double v : per) mean_sq += v * v;
    mean_sq /= static_cast<double>(p);
    CHECK(rmse_percent(gt, est) == doctest::Approx(std::sqrt(mean_sq)).epsilon(1e-10));
  }
}

TEST_CASE("matching recovers permutations exactly and under noise") {
  const EndmemberMatrix gt = random_spectra(10, 4, 3);

  // Identity.
  std::vector<std::size_t> perm = match_endmembers(gt, gt);
  CHECK(perm == std::vector<std::size_t>{0, 1, 2, 3});

  // A pure shuffle: estimate column j holds gt column order[j].
  const std::vector<std::size_t> order{2, 0, 3, 1};
  const EndmemberMatrix shuffled = shuffle_columns(gt, order);
  perm = match_endmembers(shuffled, gt);
  CHECK(perm == order);

  // Noisy shuffle at roughly 30 dB: small perturbation, same assignment.
  Prng rng(4);
  EndmemberMatrix noisy = shuffled;
  for (double& v : noisy.data.values()) v = std::max(0.0, v + 0.02 * (rng.next_unit() - 0.5));
  perm = match_endmembers(noisy, gt);
  CHECK(perm == order);

  EndmemberMatrix fewer = random_spectra(10, 3, 5);
  CHECK_THROWS_AS(match_endmembers(fewer, gt), Error);
}

TEST_CASE("hungarian assignment agrees with brute force") {
  Prng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 2 + static_cast<std::size_t>(rng.next_unit() * 5.0);  // up to 6
    Matrix cost(p, p);
    for (double& v : cost.values()) v = rng.next_unit();

    const std::vector<std::size_t> fast = min_cost_assignment(cost);

    std::vector<std::size_t> perm(p), best(p);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < p; ++i) c += cost(i, perm[i]);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));

    double fast_cost = 0.0;
    for (std::size_t i = 0; i < p; ++i) fast_cost += cost(i, fast[i]);
    CHECK(fast_cost == doctest::Approx(best_cost).epsilon(1e-12));

    // The assignment must be a bijection.
    std::vector<std::size_t> seen = fast;
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < p; ++i) CHECK(seen[i] == i);
  }
}

TEST_CASE("matching beyond the exhaustive cutoff still minimizes angle sums") {
  // p = 9 exercises the assignment-algorithm path; a pure shuffle has a
  // zero-cost optimum the algorithm must find.
  const EndmemberMatrix gt = random_spectra(12, 9, 6);
  std::vector<std::size_t> order(9);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::reverse(order.begin(), order.end());
  const EndmemberMatrix shuffled = shuffle_columns(gt, order);
  CHECK(match_endmembers(shuffled, gt) == order);
}

TEST_CASE("evaluation aligns estimates before scoring") {
  const EndmemberMatrix gt_e = random_spectra(8, 3, 9);
  Prng rng(10);
  AbundanceMatrix gt_a{Matrix(3, 20)};
  for (std::size_t j = 0; j < 20; ++j) {
    auto col = dirichlet_column(rng, 3, 1.0);
    for (std::size_t i = 0; i < 3; ++i) gt_a.data(i, j) = col[i];
  }

  // Estimate = ground truth with columns/rows cycled by one.
  const std::vector<std::size_t> order{1, 2, 0};
  const EndmemberMatrix est_e = shuffle_columns(gt_e, order);
  AbundanceMatrix est_a{Matrix(3, 20)};
  for (std::size_t j = 0; j < 20; ++j)
    for (std::size_t i = 0; i < 3; ++i) est_a.data(i, j) = gt_a.data(order[i], j);

  const EvaluationResult result = evaluate_unmixing(gt_e, gt_a, est_e, est_a);
  CHECK(result.permutation == order);
  CHECK(result.overall_rmse == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  // arccos is steep near 1, so a perfect match still reads ~1e-7 degrees.
  CHECK(result.overall_sad < 1e-5);
  CHECK_FALSE(result.ground_truth_renormalized);

  // Same answer scored against itself without the shuffle.
  const EvaluationResult direct = evaluate_unmixing(gt_e, gt_a, gt_e, gt_a);
  CHECK(direct.permutation == std::vector<std::size_t>{0, 1, 2});
  CHECK(direct.overall_rmse == 0.0);
}

TEST_CASE("evaluation renormalizes drifted ground truth and reports it") {
  const EndmemberMatrix gt_e = random_spectra(6, 2, 12);
  AbundanceMatrix gt_a{Matrix(2, 3, 0.5)};
  AbundanceMatrix est_a{Matrix(2, 3, 0.5)};

  // Scale one column off the simplex by a visible margin.
  AbundanceMatrix drifted = gt_a;
  drifted.data(0, 1) = 0.6;
  drifted.data(1, 1) = 0.6;
  const EvaluationResult result = evaluate_unmixing(gt_e, drifted, gt_e, est_a);
  CHECK(result.ground_truth_renormalized);
  CHECK(result.overall_rmse == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));

  // Sub-tolerance drift is left alone.
  AbundanceMatrix tiny = gt_a;
  tiny.data(0, 1) = 0.5 + 4e-7;
  const EvaluationResult result2 = evaluate_unmixing(gt_e, tiny, gt_e, est_a);
  CHECK_FALSE(result2.ground_truth_renormalized);
}

TEST_CASE("evaluation table lists one row per endmember plus the overall row") {
  EvaluationResult result;
  result.overall_rmse = 4.2;
  result.overall_sad = 1.6;
  result.per_rmse = {3.0, 5.0};
  result.per_sad = {1.0, 2.2};
  result.permutation = {0, 1};
  const std::string table = format_evaluation(result);
  CHECK(table.find("endmember") != std::string::npos);
  CHECK(table.find("overall") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
}
