#include "archetype/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <thread>

#include "archetype/error.hpp"
#include "archetype/matrix.hpp"

namespace archetype {

void EnsembleConfig::validate() const {
  if (runs == 0) throw Error("ensemble needs at least one run");
  if (gamma_set.empty()) throw Error("step factor set is empty");
  for (double g : gamma_set) {
    if (!std::isfinite(g) || g <= 0.0)
      throw Error("step factors must be finite and positive");
  }
  if (!std::isfinite(fit_slack) || fit_slack < 1.0)
    throw Error("fit slack must be at least 1");
  solver.validate();
}

double fit_l1(const HsiImage& x, const EndmemberMatrix& e, const AbundanceMatrix& a) {
  if (e.bands() != x.bands() || a.pixel_count() != x.pixels() ||
      e.count() != a.endmember_count())
    throw Error("fit: dimension mismatch");
  const Matrix recon = matmul(e.data, a.data);
  double total = 0.0;
  const auto xv = x.data.values();
  const auto rv = recon.values();
  for (std::size_t i = 0; i < xv.size(); ++i) total += std::abs(xv[i] - rv[i]);
  return total;
}

double coherence(const EndmemberMatrix& e, bool normalized) {
  const std::size_t p = e.count();
  if (p < 2) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < e.bands(); ++r) dot += e.data(r, i) * e.data(r, j);
      if (normalized) {
        const double ni = e.data.column_norm(i);
        const double nj = e.data.column_norm(j);
        if (ni == 0.0 || nj == 0.0) continue;
        dot /= ni * nj;
      }
      best = std::max(best, dot);
    }
  }
  if (best == -std::numeric_limits<double>::infinity()) return 0.0;
  return best;
}

double sample_gamma(Prng& rng, const std::vector<double>& gamma_set) {
  if (gamma_set.empty()) throw Error("step factor set is empty");
  auto index = static_cast<std::size_t>(rng.next_unit() *
                                        static_cast<double>(gamma_set.size()));
  // next_unit() < 1 keeps the index in range; guard anyway.
  index = std::min(index, gamma_set.size() - 1);
  return gamma_set[index];
}

SelectionReport select_runs(std::vector<RunRecord> per_run, double fit_slack) {
  SelectionReport report;
  report.per_run = std::move(per_run);

  double fit_min = std::numeric_limits<double>::infinity();
  for (const RunRecord& rec : report.per_run) {
    if (rec.ok) fit_min = std::min(fit_min, rec.fit_l1);
  }
  if (fit_min == std::numeric_limits<double>::infinity())
    throw Error("every run failed");
  report.fit_min = fit_min;

  const double cutoff = fit_slack * fit_min;
  for (const RunRecord& rec : report.per_run) {
    if (rec.ok && rec.fit_l1 <= cutoff) report.candidate_set.push_back(rec.index);
  }

  std::size_t best = report.candidate_set.front();
  for (std::size_t idx : report.candidate_set) {
    if (report.per_run[idx].coherence < report.per_run[best].coherence) best = idx;
  }
  report.selected = best;
  return report;
}

unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  if (const char* env = std::getenv("ARCHETYPE_THREADS")) {
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && parsed > 0)
      return static_cast<unsigned>(std::min<unsigned long>(parsed, 1024));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::pair<RunResult, SelectionReport> run_ensemble(const HsiImage& x,
                                                   const EnsembleConfig& config) {
  config.validate();
  x.validate();

  const std::size_t m_runs = config.runs;
  std::vector<std::optional<RunResult>> results(m_runs);
  std::vector<RunRecord> records(m_runs);

  auto run_one = [&](std::size_t m) {
    RunRecord& rec = records[m];
    rec.index = m;
    rec.seed = config.base_seed + m;
    const auto start = std::chrono::steady_clock::now();
    try {
      Prng rng(rec.seed);
      SolverConfig cfg = config.solver;
      cfg.seed = rec.seed;
      cfg.gamma = sample_gamma(rng, config.gamma_set);
      rec.gamma = cfg.gamma;
      RunResult result = run(x, cfg);
      rec.fit_l1 = result.fit_l1;
      rec.coherence = result.coherence;
      rec.ok = true;
      results[m] = std::move(result);
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    const auto stop = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  };

  const unsigned workers =
      std::min<unsigned>(resolve_workers(config.workers),
                         static_cast<unsigned>(m_runs));
  if (workers <= 1) {
    for (std::size_t m = 0; m < m_runs; ++m) run_one(m);
  } else {
    // Runs are claimed through a shared counter and written to per-run
    // slots, so the schedule cannot change the outputs.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t m = next.fetch_add(1);
          if (m >= m_runs) return;
          run_one(m);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  SelectionReport report = select_runs(std::move(records), config.fit_slack);
  RunResult selected = std::move(*results[report.selected]);
  return {std::move(selected), std::move(report)};
}

}  // namespace archetype
