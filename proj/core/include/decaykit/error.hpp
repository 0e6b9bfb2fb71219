#pragma once

#include <stdexcept>
#include <string>

namespace decaykit {

/// Raised on invalid inputs, malformed files and violated preconditions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

}  // namespace decaykit
