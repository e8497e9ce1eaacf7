#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cqms {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands from different groups, malformed normal forms, bad descriptors.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A word length was requested beyond the explored part of the Cayley graph.
class HorizonExceeded : public Error {
 public:
  HorizonExceeded(std::uint64_t required_radius, std::uint64_t horizon)
      : Error("horizon exceeded: element needs radius up to " +
              std::to_string(required_radius) + " but the length horizon is " +
              std::to_string(horizon)),
        required_radius_(required_radius) {}

  std::uint64_t required_radius() const noexcept { return required_radius_; }

 private:
  std::uint64_t required_radius_;
};

/// Memory or cardinality budget exhausted.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::uint64_t partial_radius)
      : Error(what + " (complete up to radius " + std::to_string(partial_radius) + ")"),
        partial_radius_(partial_radius) {}

  std::uint64_t partial_radius() const noexcept { return partial_radius_; }

 private:
  std::uint64_t partial_radius_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cqms
