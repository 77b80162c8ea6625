#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "archetype/matrix.hpp"
#include "archetype/types.hpp"

namespace archetype {

// Scores of an estimate against ground truth, indexed by ground-truth
// endmember. RMSE is in percent, SAD in degrees.
struct EvaluationResult {
  double overall_rmse = 0.0;
  double overall_sad = 0.0;
  std::vector<double> per_rmse;
  std::vector<double> per_sad;
  // permutation[j] is the ground-truth column matched to estimate column j.
  std::vector<std::size_t> permutation;
  bool ground_truth_renormalized = false;
};

// Angle in degrees between column ja of a and column jb of b; the cosine
// is clamped to [-1, 1] before arccos.
double spectral_angle_deg(const Matrix& a, std::size_t ja, const Matrix& b, std::size_t jb);

// Minimum-cost bijection rows → columns of a square cost matrix.
std::vector<std::size_t> min_cost_assignment(const Matrix& cost);

// Bijection est column → gt column minimizing total spectral angle,
// exhaustive for p ≤ 8 and via min_cost_assignment beyond.
std::vector<std::size_t> match_endmembers(const EndmemberMatrix& est, const EndmemberMatrix& gt);

// 100·sqrt(mean squared difference); the per-endmember variant restricts
// to one row. Estimates must already be in ground-truth order.
double rmse_percent(const AbundanceMatrix& gt, const AbundanceMatrix& est);
std::vector<double> rmse_per_endmember(const AbundanceMatrix& gt, const AbundanceMatrix& est);

// Mean spectral angle in degrees over matched column pairs.
double sad_degrees(const EndmemberMatrix& gt, const EndmemberMatrix& est);
std::vector<double> sad_per_endmember(const EndmemberMatrix& gt, const EndmemberMatrix& est);

// Matches estimated endmembers to ground truth, then scores abundances
// and spectra in the matched order. Ground-truth abundance columns whose
// sums stray more than 1e-6 from 1 are renormalized first (flagged in
// the result).
EvaluationResult evaluate_unmixing(const EndmemberMatrix& gt_e, const AbundanceMatrix& gt_a,
                                   const EndmemberMatrix& est_e, const AbundanceMatrix& est_a);

// Aligned per-endmember/overall table, one row per endmember.
std::string format_evaluation(const EvaluationResult& result);

}  // namespace archetype
