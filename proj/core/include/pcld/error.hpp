#pragma once

#include <stdexcept>
#include <string>

namespace pcld {

/// Error type thrown for malformed inputs, contract violations and decode
/// failures. Decoding never crashes on corrupt data; it throws this.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

}  // namespace pcld
