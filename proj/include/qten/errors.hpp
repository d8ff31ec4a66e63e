#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qten {

/// Scalar-level domain violation (zero inverse, polar form of zero,
/// non-real coefficient on a central tensor mode, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch or otherwise inconsistent shapes.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A complex matrix that should carry quaternion-adjoint block structure
/// does not, within tolerance. Carries the worst relative mismatch seen.
class StructureError : public std::runtime_error {
 public:
  StructureError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_ = 0.0;
};

/// A rank decision fell inside a singular-value pair, so the quaternion
/// rank is numerically ambiguous. Carries the full singular spectrum.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, std::vector<double> spectrum)
      : std::runtime_error(what), spectrum_(std::move(spectrum)) {}
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }

 private:
  std::vector<double> spectrum_;
};

/// A combinatorial guard (Kruskal-rank subset enumeration) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scaling/permutation triple fails the admissibility condition.
class InvalidScalingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation's mathematical precondition does not hold for the input.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver block update produced a non-finite result.
class SingularUpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File format or I/O failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qten
