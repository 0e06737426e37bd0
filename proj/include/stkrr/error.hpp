#pragma once

#include <stdexcept>
#include <string>

namespace stkrr {

/// Point outside the kernel's declared domain.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Malformed or out-of-range argument.
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Eigensolver failure or an input that is not numerically PSD.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Truncation level exceeds the numerical rank of the kernel matrix.
class RankError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// All-zero spectrum where a positive eigenvalue is required.
class DegenerateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A bound or claim requested outside the region where it holds.
class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace stkrr
