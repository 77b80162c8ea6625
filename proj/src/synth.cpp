#include "archetype/synth.hpp"

#include <cmath>

#include "archetype/error.hpp"
#include "archetype/matrix.hpp"

namespace archetype {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr std::size_t kBumpsPerSpectrum = 5;

}  // namespace

void SynthSpec::validate() const {
  if (endmembers < 2) throw Error("synth spec: need at least 2 endmembers");
  if (bands < endmembers) throw Error("synth spec: need at least as many bands as endmembers");
  if (pixels < endmembers) throw Error("synth spec: need at least as many pixels as endmembers");
  if (snr_db && !std::isfinite(*snr_db)) throw Error("synth spec: SNR must be finite");
  if (!(dirichlet_alpha > 0.0) || !std::isfinite(dirichlet_alpha))
    throw Error("synth spec: alpha must be positive");
}

double normal_variate(Prng& rng) {
  const double u1 = rng.next_unit();
  const double u2 = rng.next_unit();
  // 1 − u1 ∈ (0, 1], so the logarithm is finite.
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(kTwoPi * u2);
}

double gamma_variate(Prng& rng, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("gamma variate: alpha must be positive");
  if (alpha < 1.0) {
    const double g = gamma_variate(rng, alpha + 1.0);
    const double u = rng.next_unit();
    return g * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal_variate(rng);
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.next_unit();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> dirichlet_column(Prng& rng, std::size_t p, double alpha) {
  if (p < 1) throw Error("dirichlet: need at least one coordinate");
  std::vector<double> out(p);
  double sum = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    out[i] = gamma_variate(rng, alpha);
    sum += out[i];
  }
  if (sum <= 0.0) {
    // All-zero draws are possible only through pow underflow at tiny alpha.
    for (double& v : out) v = 1.0 / static_cast<double>(p);
    return out;
  }
  for (double& v : out) v /= sum;
  return out;
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t l = spec.bands;
  const std::size_t n = spec.pixels;
  const std::size_t p = spec.endmembers;
  Prng rng(spec.seed);

  // Spectra first, then abundances, then noise: one fixed consumption
  // order so toggling noise or pure pixels never shifts earlier draws.
  Matrix e(l, p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t g = 0; g < kBumpsPerSpectrum; ++g) {
      const double amp = 0.2 + 0.8 * rng.next_unit();
      const double center = rng.next_unit();
      const double width = 0.04 + 0.12 * rng.next_unit();
      for (std::size_t i = 0; i < l; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(l - 1);
        const double z = (t - center) / width;
        e(i, j) += amp * std::exp(-0.5 * z * z);
      }
    }
    const double norm = e.column_norm(j);
    for (std::size_t i = 0; i < l; ++i) e(i, j) /= norm;
  }

  Matrix a(p, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<double> col = dirichlet_column(rng, p, spec.dirichlet_alpha);
    for (std::size_t i = 0; i < p; ++i) a(i, j) = col[i];
  }
  if (spec.pure_pixels) {
    // Overwrite after drawing every column; the rest of A is unchanged by
    // this flag.
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t i = 0; i < p; ++i) a(i, j) = (i == j) ? 1.0 : 0.0;
    }
  }

  Matrix x = matmul(e, a);
  if (spec.snr_db) {
    Matrix noise(l, n);
    for (double& v : noise.values()) v = normal_variate(rng);
    const double signal_norm = x.frobenius_norm();
    const double noise_norm = noise.frobenius_norm();
    if (noise_norm > 0.0) {
      const double scale = (signal_norm / noise_norm) *
                           std::pow(10.0, -*spec.snr_db / 20.0);
      auto xv = x.values();
      const auto nv = noise.values();
      for (std::size_t i = 0; i < xv.size(); ++i) {
        xv[i] += scale * nv[i];
        if (xv[i] < 0.0) xv[i] = 0.0;
      }
    }
  }

  SynthData data;
  data.image.data = std::move(x);
  data.endmembers = {std::move(e)};
  data.abundances = {std::move(a)};
  return data;
}

}  // namespace archetype
