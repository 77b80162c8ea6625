#pragma once

#include <string>

#include "archetype/image.hpp"

namespace archetype {

// Band-sequential ENVI cube: text header plus raw data file. Supported
// subset is interleave bsq, data type 4 or 5, byte order 0; anything else
// is an error naming the offending field. Wavelengths are attached when
// the header lists them.
HsiImage read_envi(const std::string& header_path, const std::string& data_path);

// Companion data file for a header path: the path with ".hdr" stripped,
// or that base with ".img", ".dat", or ".raw" appended, whichever exists.
std::string envi_data_path(const std::string& header_path);

}  // namespace archetype
