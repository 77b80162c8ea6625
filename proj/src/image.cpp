#include "archetype/image.hpp"

#include <cmath>
#include <sstream>

#include "archetype/error.hpp"

namespace archetype {

void HsiImage::validate() const {
  if (bands() < 1 || pixels() < 1) throw Error("image: needs at least one band and one pixel");
  for (double v : data.values()) {
    if (!std::isfinite(v)) throw Error("image: non-finite reflectance");
    if (v < 0.0) throw Error("image: negative reflectance");
  }
  if (spatial) {
    if (spatial->height * spatial->width != pixels()) {
      std::ostringstream msg;
      msg << "image: spatial shape " << spatial->height << "x" << spatial->width
          << " does not cover " << pixels() << " pixels";
      throw Error(msg.str());
    }
  }
  if (!wavelengths.empty() && wavelengths.size() != bands()) {
    throw Error("image: wavelength list length differs from band count");
  }
}

NormalizeResult l2_normalize(const HsiImage& image) {
  image.validate();
  NormalizeResult out;
  out.image = image;
  const std::size_t n = image.pixels();
  const std::size_t l = image.bands();
  bool any_nonzero = false;
  for (std::size_t j = 0; j < n; ++j) {
    const double norm = image.data.column_norm(j);
    if (norm == 0.0) {
      out.zero_pixels.push_back(j);
      continue;
    }
    any_nonzero = true;
    for (std::size_t i = 0; i < l; ++i) out.image.data(i, j) = image.data(i, j) / norm;
  }
  if (!any_nonzero) throw Error("degenerate input: all pixels are zero");
  return out;
}

}  // namespace archetype
