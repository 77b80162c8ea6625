#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "archetype/image.hpp"
#include "archetype/prng.hpp"
#include "archetype/types.hpp"

namespace archetype {

struct SynthSpec {
  std::size_t bands = 0;       // L
  std::size_t pixels = 0;      // N
  std::size_t endmembers = 0;  // p
  std::optional<double> snr_db;  // absent: noiseless
  double dirichlet_alpha = 1.0;
  bool pure_pixels = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  HsiImage image;
  EndmemberMatrix endmembers;
  AbundanceMatrix abundances;
};

// One standard normal via Box–Muller; consumes exactly two uniforms.
double normal_variate(Prng& rng);

// Gamma(alpha, 1) by Marsaglia–Tsang squeeze for alpha ≥ 1, boosted with
// u^(1/alpha) below 1.
double gamma_variate(Prng& rng, double alpha);

// Dirichlet(alpha·1) draw: p gamma variates normalized to sum 1.
std::vector<double> dirichlet_column(Prng& rng, std::size_t p, double alpha);

// Linear mixing model fixture: smooth unit-norm spectra, Dirichlet
// abundances (optionally with one exact pure pixel per endmember), and
// Gaussian noise scaled to the requested SNR then clamped at 0. Bitwise
// reproducible from the SynthSpec fields alone.
SynthData generate(const SynthSpec& spec);

}  // namespace archetype
