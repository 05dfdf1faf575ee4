#pragma once

#include <stdexcept>
#include <string>

namespace qaction {

// Error taxonomy used across the library:
//   config_error  - the requested setup is invalid (bad grid, window on a wall, ...)
//   domain_error  - setup is fine, the mathematical input is not (T <= 0, G <= 0, ...)
//   numeric_error - an algorithm failed to converge or the problem is degenerate
//   io_error      - filesystem trouble while writing artifacts
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : error {
  using error::error;
};

struct domain_error : error {
  using error::error;
};

struct numeric_error : error {
  using error::error;
};

struct io_error : error {
  using error::error;
};

}  // namespace qaction
