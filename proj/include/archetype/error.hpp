#pragma once

#include <stdexcept>
#include <string>

namespace archetype {

// Data/computation errors raised by the library. The CLI maps these to
// exit code 2; usage errors are handled by the argument parser (exit 1).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace archetype
