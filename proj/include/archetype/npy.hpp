#pragma once

#include <span>
#include <string>
#include <vector>

#include "archetype/image.hpp"
#include "archetype/matrix.hpp"

namespace archetype {

enum class NpyDtype { f4, f8 };

// Little-endian IEEE float array in C order, widened to double in memory.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  NpyDtype dtype = NpyDtype::f8;

  std::size_t element_count() const;
};

// Format versions 1.0 and 2.0, dtypes <f4 and <f8, C order only; anything
// else is a descriptive error carrying the path.
NpyArray read_npy(const std::string& path);

// Version 1.0 header padded to a 64-byte boundary.
void write_npy(const std::string& path, std::span<const std::size_t> shape,
               std::span<const double> values, NpyDtype dtype = NpyDtype::f8);

// 2-D array as a matrix, row count first.
Matrix npy_to_matrix(const NpyArray& array);

// 2-D arrays become band×pixel images directly; 3-D arrays are taken as
// (height, width, bands) and flattened with pixel index row·width + col.
HsiImage npy_to_image(const NpyArray& array);

}  // namespace archetype
