#include "archetype/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "archetype/error.hpp"

namespace archetype {

namespace {

constexpr double kPi = 3.14159265358979323846;

double column_dot(const Matrix& a, std::size_t ja, const Matrix& b, std::size_t jb) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, ja) * b(i, jb);
  return s;
}

// Angle cost between every (est column, gt column) pair.
Matrix angle_cost(const EndmemberMatrix& est, const EndmemberMatrix& gt) {
  const std::size_t p = est.count();
  Matrix cost(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < p; ++i) cost(j, i) = spectral_angle_deg(est.data, j, gt.data, i);
  }
  return cost;
}

}  // namespace

double spectral_angle_deg(const Matrix& a, std::size_t ja, const Matrix& b, std::size_t jb) {
  if (a.rows() != b.rows()) throw Error("spectral angle: band count mismatch");
  const double na = a.column_norm(ja);
  const double nb = b.column_norm(jb);
  if (na == 0.0 || nb == 0.0) throw Error("SAD undefined for zero spectrum");
  const double cosine = std::clamp(column_dot(a, ja, b, jb) / (na * nb), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / kPi;
}

std::vector<std::size_t> min_cost_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols() || cost.rows() == 0)
    throw Error("assignment: cost matrix must be square and non-empty");
  if (!cost.all_finite()) throw Error("assignment: non-finite cost");
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Shortest augmenting paths over the dual potentials (u, v); p[j] is the
  // row matched to column j, 1-based with column 0 as the staging slot.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<std::size_t> out(n);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) out[p[j] - 1] = static_cast<std::size_t>(j - 1);
  }
  return out;
}

std::vector<std::size_t> match_endmembers(const EndmemberMatrix& est, const EndmemberMatrix& gt) {
  if (est.count() != gt.count()) throw Error("matching: endmember count mismatch");
  if (est.bands() != gt.bands()) throw Error("matching: band count mismatch");
  const std::size_t p = est.count();
  if (p == 0) throw Error("matching: no endmembers");

  const Matrix cost = angle_cost(est, gt);
  if (p > 8) return min_cost_assignment(cost);

  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t j = 0; j < p; ++j) c += cost(j, perm[j]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double rmse_percent(const AbundanceMatrix& gt, const AbundanceMatrix& est) {
  if (gt.data.rows() != est.data.rows() || gt.data.cols() != est.data.cols())
    throw Error("rmse: shape mismatch");
  const auto g = gt.data.values();
  const auto e = est.data.values();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = g[i] - e[i];
    s += d * d;
  }
  return 100.0 * std::sqrt(s / static_cast<double>(g.size()));
}

std::vector<double> rmse_per_endmember(const AbundanceMatrix& gt, const AbundanceMatrix& est) {
  if (gt.data.rows() != est.data.rows() || gt.data.cols() != est.data.cols())
    throw Error("rmse: shape mismatch");
  const std::size_t p = gt.data.rows();
  const std::size_t n = gt.data.cols();
  std::vector<double> out(p);
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = gt.data(i, j) - est.data(i, j);
      s += d * d;
    }
    out[i] = 100.0 * std::sqrt(s / static_cast<double>(n));
  }
  return out;
}

std::vector<double> sad_per_endmember(const EndmemberMatrix& gt, const EndmemberMatrix& est) {
  if (gt.count() != est.count() || gt.bands() != est.bands())
    throw Error("sad: shape mismatch");
  std::vector<double> out(gt.count());
  for (std::size_t i = 0; i < gt.count(); ++i)
    out[i] = spectral_angle_deg(gt.data, i, est.data, i);
  return out;
}

double sad_degrees(const EndmemberMatrix& gt, const EndmemberMatrix& est) {
  const std::vector<double> per = sad_per_endmember(gt, est);
  return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
}

EvaluationResult evaluate_unmixing(const EndmemberMatrix& gt_e, const AbundanceMatrix& gt_a,
                                   const EndmemberMatrix& est_e, const AbundanceMatrix& est_a) {
  const std::size_t p = gt_e.count();
  if (gt_a.endmember_count() != p || est_e.count() != p || est_a.endmember_count() != p)
    throw Error("evaluate: endmember count mismatch");
  if (gt_e.bands() != est_e.bands()) throw Error("evaluate: band count mismatch");
  if (gt_a.pixel_count() != est_a.pixel_count()) throw Error("evaluate: pixel count mismatch");

  EvaluationResult result;

  // Published ground truths often carry rounding; pull the columns back to
  // the simplex when the drift is measurable.
  AbundanceMatrix gt_fixed = gt_a;
  for (std::size_t j = 0; j < gt_fixed.pixel_count(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) sum += gt_fixed.data(i, j);
    if (std::abs(sum - 1.0) <= 1e-6) continue;
    if (sum <= 0.0) throw Error("evaluate: ground-truth abundance column sums to zero");
    for (std::size_t i = 0; i < p; ++i) gt_fixed.data(i, j) /= sum;
    result.ground_truth_renormalized = true;
  }

  result.permutation = match_endmembers(est_e, gt_e);

  Matrix e_aligned(est_e.bands(), p);
  Matrix a_aligned(p, est_a.pixel_count());
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t target = result.permutation[j];
    for (std::size_t r = 0; r < est_e.bands(); ++r) e_aligned(r, target) = est_e.data(r, j);
    for (std::size_t c = 0; c < est_a.pixel_count(); ++c) a_aligned(target, c) = est_a.data(j, c);
  }
  const EndmemberMatrix est_e_aligned{std::move(e_aligned)};
  const AbundanceMatrix est_a_aligned{std::move(a_aligned)};

  result.per_rmse = rmse_per_endmember(gt_fixed, est_a_aligned);
  result.per_sad = sad_per_endmember(gt_e, est_e_aligned);
  result.overall_rmse = rmse_percent(gt_fixed, est_a_aligned);
  result.overall_sad =
      std::accumulate(result.per_sad.begin(), result.per_sad.end(), 0.0) / static_cast<double>(p);
  return result;
}

std::string format_evaluation(const EvaluationResult& result) {
  std::string out;
  char line[96];
  std::snprintf(line, sizeof(line), "%-12s %10s %10s\n", "endmember", "RMSE", "SAD");
  out += line;
  for (std::size_t i = 0; i < result.per_rmse.size(); ++i) {
    std::snprintf(line, sizeof(line), "%-12zu %10.4f %10.4f\n", i + 1, result.per_rmse[i],
                  result.per_sad[i]);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-12s %10.4f %10.4f\n", "overall", result.overall_rmse,
                result.overall_sad);
  out += line;
  return out;
}

}  // namespace archetype
