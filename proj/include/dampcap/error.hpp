#pragma once

#include <stdexcept>
#include <string>

namespace dampcap {

// Base of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside an operation's domain: bad parameters, malformed configs,
// non-stochastic matrices and the like.
class validation_error : public error {
 public:
  using error::error;
};

class dimension_error : public error {
 public:
  using error::error;
};

// A numerical invariant that should hold by construction was violated.
class numerical_error : public error {
 public:
  using error::error;
};

}  // namespace dampcap
