#pragma once

#include <stdexcept>
#include <string>

namespace nodelife {

// Argument outside the mathematical domain of an operation (negative time,
// zero resistance, NaN threshold, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Fewer samples than coefficients.
class InsufficientSamples : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Least-squares system without full column rank.
class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed external input: CSV rows, JSON config, unknown preset names.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable source or unwritable destination.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace nodelife
