#pragma once

#include "qten/adjoint.hpp"
#include "qten/qmatrix.hpp"

namespace qten {

/// Columns a quaternion-matrix subset enumeration may have before the
/// combinatorial Kruskal-rank search refuses to run.
inline constexpr Index kKruskalColumnGuard = 12;

/// Numerical rank of a complex matrix: singular values above
/// tol (or, with tol <= 0, above max(rows, cols) * eps * sigma_max).
Index numerical_rank(const CMatrix& m, double tol = 0.0);

/// Singular values of the matrix, descending.
std::vector<double> singular_values(const CMatrix& m);

/// Right (column) rank: dimension of the span of right linear combinations
/// of the columns. Equals half the rank of the direct adjoint, whose
/// singular values come in pairs; if the tolerance splits a pair the result
/// would be numerically meaningless, so IllConditionedError is thrown with
/// the spectrum attached. tol <= 0 selects the default policy above,
/// applied to the adjoint's dimensions.
Index rank_right(const QMatrix& a, double tol = 0.0);

/// Left analogue, via the reverse adjoint.
Index rank_left(const QMatrix& a, double tol = 0.0);

enum class KrankMethod {
  BruteForce,      ///< enumerate every column subset (guarded)
  AssumeGeneric,   ///< trust genericity and return min(rows, cols) directly
};

/// Right Kruskal rank: largest r such that every r-column submatrix has
/// right rank r. Enumeration cost grows combinatorially, so matrices with
/// more than `guard` columns are rejected with ResourceError unless the
/// generic shortcut is requested explicitly.
Index kruskal_rank_right(const QMatrix& a, double tol = 0.0,
                         KrankMethod method = KrankMethod::BruteForce,
                         Index guard = kKruskalColumnGuard);

Index kruskal_rank_left(const QMatrix& a, double tol = 0.0,
                        KrankMethod method = KrankMethod::BruteForce,
                        Index guard = kKruskalColumnGuard);

/// Kruskal rank of a real matrix (classical definition).
Index kruskal_rank_real(const RMatrix& a, double tol = 0.0,
                        KrankMethod method = KrankMethod::BruteForce,
                        Index guard = kKruskalColumnGuard);

}  // namespace qten
