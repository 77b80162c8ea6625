#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace archetype {

// Batch front end. `args` excludes the program name. Returns 0 on
// success, 1 on usage errors, 2 on data errors.
int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// argv convenience wrapper over std::cout/std::cerr.
int cli_main(int argc, const char* const* argv);

}  // namespace archetype
