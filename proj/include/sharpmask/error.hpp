#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sharpmask {

enum class ErrorKind {
  Validation,  // malformed input, bad parameters, unknown config keys
  Io,          // unreadable / unwritable files, decode failures
  Shape,       // tensor shape does not match the contract
  Contract,    // invariant violated at runtime (digest, stage tag, freeze)
  Diverged,    // non-finite loss or gradient during training
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Error(ErrorKind kind, const std::string& message, std::vector<std::string> keys)
      : std::runtime_error(message), kind_(kind), keys_(std::move(keys)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Offending config keys, when the error concerns configuration.
  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> keys_;
};

}  // namespace sharpmask
