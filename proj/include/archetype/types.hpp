#pragma once

#include "archetype/matrix.hpp"

namespace archetype {

// p×N matrix whose columns live on the p-simplex.
struct AbundanceMatrix {
  Matrix data;

  std::size_t endmember_count() const { return data.rows(); }
  std::size_t pixel_count() const { return data.cols(); }

  // Checks entries ≥ 0 and column sums within `tol` of 1.
  void validate(double tol = 1e-9) const;
};

// N×p matrix whose columns live on the N-simplex; endmembers are X·B.
struct ContributionMatrix {
  Matrix data;

  std::size_t pixel_count() const { return data.rows(); }
  std::size_t endmember_count() const { return data.cols(); }

  void validate(double tol = 1e-9) const;
};

// L×p matrix of endmember spectra.
struct EndmemberMatrix {
  Matrix data;

  std::size_t bands() const { return data.rows(); }
  std::size_t count() const { return data.cols(); }
};

// Shared check for the two simplex-column types.
void validate_simplex_columns(const Matrix& m, double tol, const char* what);

}  // namespace archetype
