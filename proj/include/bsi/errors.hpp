#pragma once

#include <stdexcept>
#include <string>

namespace bsi {

/// Malformed user input: bad symbols, unparsable files, inconsistent machines.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request that is well formed but too large to satisfy.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No candidate topology assigns nonzero likelihood to the data.
class NoAcceptingTopology : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bsi
