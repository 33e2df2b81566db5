#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace focq {

using Int = boost::multiprecision::cpp_int;

// Malformed user input: bad syntax, unknown names, arity mismatches.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Expression lies outside the fragment an engine supports.
class UnsupportedError : public InputError {
 public:
  using InputError::InputError;
};

inline std::string to_string(const Int& v) { return v.str(); }

// True when v is exactly representable as an IEEE double integer.
inline bool fits_53_bits(const Int& v) {
  static const Int limit = Int(1) << 53;
  return v <= limit && v >= -limit;
}

}  // namespace focq
