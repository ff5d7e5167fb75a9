#pragma once

#include <stdexcept>
#include <string>

namespace blaser {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Embedding / model file decoding failures.
class FormatError : public Error {
 public:
  enum class Kind { kIo, kBadMagic, kUnsupportedVersion, kTruncated, kCorrupt };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// A dataset invariant does not hold. `instance_id` is empty when the problem
// is not tied to a single instance (e.g. a manifest parse error).
class ValidationError : public Error {
 public:
  ValidationError(std::string instance_id, const std::string& what)
      : Error(instance_id.empty() ? what : "instance '" + instance_id + "': " + what),
        instance_id_(std::move(instance_id)) {}
  const std::string& instance_id() const noexcept { return instance_id_; }

 private:
  std::string instance_id_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Numerically undefined input: zero-norm vectors, constant series, etc.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace blaser
