#ifndef LD_CLI_APP_HPP
#define LD_CLI_APP_HPP

#include <array>
#include <string>

#include "ld/ldfield.hpp"

namespace ld {

// Full command-line entry point (parsing, validation, artifact writing).
// Returns the process exit status: 0 iff all requested artifacts were
// written.
int cli_main(int argc, const char* const* argv);

// "[lo,hi]x[lo,hi]@N" or "...@NxM"; throws ConfigError on malformed input.
struct GridParse {
  std::array<std::array<double, 2>, 2> ranges;
  std::array<int, 2> resolution;
};
GridParse parse_grid_string(const std::string& text);

}  // namespace ld

#endif  // LD_CLI_APP_HPP
