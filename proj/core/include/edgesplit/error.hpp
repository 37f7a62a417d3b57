#pragma once

#include <stdexcept>
#include <string>

namespace edgesplit {

// Bad caller input: violated preconditions, malformed options.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad data: unparsable files, inconsistent measurements, degenerate fits.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Something failed while running workers or sampling power.
class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edgesplit
