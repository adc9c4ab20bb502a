#pragma once

#include <stdexcept>
#include <string>

namespace phasecrb {

/// Input rejected by a precondition check (bad label, out-of-range index, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dense factorization found the matrix numerically singular.
class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form intermediate violated an invariant it must satisfy for valid
/// inputs (e.g. a non-positive Schur complement). Indicates a bug, not bad input.
class InconsistentResult : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}
}  // namespace detail

}  // namespace phasecrb
