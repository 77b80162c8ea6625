#pragma once

namespace archetype {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace archetype
