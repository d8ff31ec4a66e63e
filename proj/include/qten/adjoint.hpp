#pragma once

#include "qten/qmatrix.hpp"

namespace qten {

/// Complex adjoint layouts for A = A1 + A2*j (Cayley-Dickson parts).
///
///   Direct    [[ A1        A2      ]     multiplicative for *>
///              [ -conj(A2) conj(A1)]]
///   Reverse   [[ A1  -conj(A2)]          multiplicative for *<
///              [ A2   conj(A1)]]
///
/// The columnwise variants apply the same 2x2 layout per column: block n of
/// the result (2 columns wide) is the adjoint of column a_n. A fixed real
/// permutation relates the two groupings, see adjoint_column_permutation.
enum class AdjointKind { Direct, Reverse, DirectColumnwise, ReverseColumnwise };

/// 2M x 2N complex adjoint of an M x N quaternion matrix.
CMatrix adjoint(const QMatrix& a, AdjointKind kind);

/// Worst structural mismatch of x against the redundancy pattern of `kind`,
/// relative to the largest entry modulus (0 for an exact adjoint).
double adjoint_structure_residual(const CMatrix& x, AdjointKind kind);

/// Inverse of `adjoint`. Requires the structural residual <= tol; throws
/// StructureError otherwise. Redundant blocks are averaged, so roundoff-level
/// asymmetry is absorbed.
QMatrix from_adjoint(const CMatrix& x, AdjointKind kind, double tol = 1e-10);

/// Permutation P (2N x 2N, real) with adjoint(A, Direct) =
/// adjoint(A, DirectColumnwise) * P, and likewise for the reverse pair.
/// P[2n, n] = 1 and P[2n+1, N+n] = 1 (zero-based).
RMatrix adjoint_column_permutation(Index ncols);

}  // namespace qten
