#pragma once

#include <stdexcept>

namespace cspapi {

/// Shape mismatch between arrays, grids, or measurement matrices. Mapped to
/// its own CLI exit code.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace cspapi
