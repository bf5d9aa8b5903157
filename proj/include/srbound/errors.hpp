#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace srb {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Value outside the emulated normal range (subnormal, overflow, non-finite).
class OutOfRange : public Error {
 public:
  using Error::Error;
};

// Operand handed to an SR operation is not representable in the format.
class NotRepresentable : public Error {
 public:
  using Error::Error;
};

// Relative error and condition bound are undefined at an exact zero.
class ConditionUndefined : public Error {
 public:
  explicit ConditionUndefined(std::uint32_t node)
      : Error("condition bound undefined at node " + std::to_string(node) +
              " (exact value is zero on the path)"),
        node_(node) {}
  std::uint32_t node() const noexcept { return node_; }

 private:
  std::uint32_t node_;
};

// The two operands of a product share a rounding error.
class BiasedMultiplication : public Error {
 public:
  BiasedMultiplication(std::uint32_t left, std::uint32_t right,
                       std::uint32_t witness, const std::string& where = {})
      : Error((where.empty() ? std::string() : where + ": ") +
              "biased multiplication: operands " + std::to_string(left) +
              " and " + std::to_string(right) +
              " share the rounding error of node " + std::to_string(witness)),
        left_(left),
        right_(right),
        witness_(witness) {}
  std::uint32_t left() const noexcept { return left_; }
  std::uint32_t right() const noexcept { return right_; }
  std::uint32_t witness() const noexcept { return witness_; }

 private:
  std::uint32_t left_, right_, witness_;
};

class InvalidLambda : public Error {
 public:
  explicit InvalidLambda(double lambda)
      : Error("lambda must lie in (0, 1), got " + std::to_string(lambda)) {}
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidDegree : public Error {
 public:
  using Error::Error;
};

}  // namespace srb
