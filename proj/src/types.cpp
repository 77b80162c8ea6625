#include "archetype/types.hpp"

#include <cmath>
#include <string>

#include "archetype/error.hpp"

namespace archetype {

void validate_simplex_columns(const Matrix& m, double tol, const char* what) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      if (!std::isfinite(v))
        throw Error(std::string(what) + ": non-finite entry in column " + std::to_string(j));
      if (v < 0.0)
        throw Error(std::string(what) + ": negative entry in column " + std::to_string(j));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      throw Error(std::string(what) + ": column " + std::to_string(j) +
                  " sums to " + std::to_string(sum));
  }
}

void AbundanceMatrix::validate(double tol) const {
  validate_simplex_columns(data, tol, "abundances");
}

void ContributionMatrix::validate(double tol) const {
  validate_simplex_columns(data, tol, "contributions");
}

}  // namespace archetype
