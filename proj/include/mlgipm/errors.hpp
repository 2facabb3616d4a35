// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mlgipm {

/// Incompatible or non-square dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of the operation (branch cuts,
/// non-algebra matrices, off-group elements).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iteration failed to converge or a factorization broke down.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear system singular even after regularization.
class SingularError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A group element left its manifold beyond the cleanup tolerance.
class GroupDriftError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mlgipm
