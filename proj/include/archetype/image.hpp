#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "archetype/matrix.hpp"

namespace archetype {

struct Shape2d {
  std::size_t height = 0;
  std::size_t width = 0;
};

// Hyperspectral observation: one column per pixel, one row per band.
// Entries are reflectances, finite and non-negative.
struct HsiImage {
  Matrix data;                        // bands × pixels
  std::optional<Shape2d> spatial;     // present when pixels form an H×W grid
  std::vector<double> wavelengths;    // nanometers; empty when unknown

  std::size_t bands() const { return data.rows(); }
  std::size_t pixels() const { return data.cols(); }

  // Throws Error if any invariant is violated.
  void validate() const;
};

struct NormalizeResult {
  HsiImage image;
  // Pixels whose spectrum was exactly zero; left untouched by the
  // normalization and surfaced here so reports can count them.
  std::vector<std::size_t> zero_pixels;
};

// Scales every nonzero pixel spectrum to unit ℓ2 norm.
// Throws "degenerate input" when the whole image is zero.
NormalizeResult l2_normalize(const HsiImage& image);

}  // namespace archetype
