#pragma once

#include <stdexcept>

namespace cmpsmooth {

// Argument outside the documented domain (negative count, bad parameter).
struct domain_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An iterative routine exhausted its budget without meeting tolerance.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text (count files, target specs). Message carries
// file/line context where available.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cmpsmooth
