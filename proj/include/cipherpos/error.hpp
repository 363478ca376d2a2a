#pragma once

#include <stdexcept>
#include <string>

namespace cipherpos {

// Bad or inconsistent user input: unreadable files, malformed rows,
// mismatched tagsets. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A broken internal invariant. The CLI maps this to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cipherpos
