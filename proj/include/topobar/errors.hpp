#pragma once

#include <stdexcept>
#include <string>

namespace topobar {

// Bad user input: unreadable files, malformed formats, violated preconditions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

// A computed result broke one of its own invariants.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace topobar
