#pragma once

#include "qten/adjoint.hpp"
#include "qten/qmatrix.hpp"

namespace qten {

/// Least-squares solution plus a flag noting that the coefficient matrix was
/// rank deficient and the minimum-norm pseudo-inverse path was taken.
struct LstsqResult {
  QMatrix solution;
  bool rank_deficient = false;
};

/// argmin_X || M - X *> N ||_F for M (m x p), N (n x p); X is m x n.
///
/// Solved in the adjoint domain with a rank-revealing QR: the direct adjoint
/// is multiplicative and norm-preserving (up to a factor sqrt(2)), and both
/// the unique full-rank solution and the minimum-norm solution inherit the
/// adjoint block structure, so the quaternion solution is read back exactly.
LstsqResult lstsq_direct(const QMatrix& m, const QMatrix& n);

/// argmin over real X of || M - X N ||_F (N quaternion). Equivalent to a
/// real least-squares problem over the four stacked component planes.
LstsqResult lstsq_real_constrained(const QMatrix& m, const QMatrix& n);

/// argmin_X || M - X *< N ||_F, via the reverse adjoint.
LstsqResult lstsq_reverse(const QMatrix& m, const QMatrix& n);

/// Moore-Penrose pseudo-inverse with respect to the direct or reverse
/// product: A *> pinv(A) *> A = A (direct), likewise for reverse. Computed
/// as the complex SVD pseudo-inverse of the adjoint; throws StructureError
/// if the result loses the adjoint structure (relative residual > 1e-8).
/// tol <= 0 selects the default rank tolerance policy.
QMatrix pinv(const QMatrix& a, AdjointKind kind = AdjointKind::Direct, double tol = 0.0);

/// Complex SVD pseudo-inverse with the same tolerance policy.
CMatrix pinv_complex(const CMatrix& a, double tol = 0.0);

}  // namespace qten
