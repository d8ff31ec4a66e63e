#include "qten/lstsq.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <limits>

namespace qten {

namespace {

// Least-squares solve of A X = B (A tall or wide). Full column rank goes
// through column-pivoted QR; otherwise the minimum-norm solution via a
// complete orthogonal decomposition, with the deficiency reported.
template <typename Matrix>
Matrix ls_solve(const Matrix& a, const Matrix& b, bool* deficient) {
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() == a.cols()) {
    if (deficient) *deficient = false;
    return qr.solve(b);
  }
  if (deficient) *deficient = true;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  return cod.solve(b);
}

// argmin_Y || CM - Y CN ||_F: transpose to a standard left-hand solve.
template <typename Matrix>
Matrix ls_solve_left(const Matrix& cm, const Matrix& cn, bool* deficient) {
  Matrix yh = ls_solve<Matrix>(cn.adjoint(), cm.adjoint(), deficient);
  return yh.adjoint();
}

LstsqResult lstsq_adjoint_kind(const QMatrix& m, const QMatrix& n, AdjointKind kind) {
  if (m.cols() != n.cols()) throw ShapeError("lstsq: M and N need equal column counts");
  const CMatrix cm = adjoint(m, kind);
  const CMatrix cn = adjoint(n, kind);
  bool deficient = false;
  const CMatrix y = ls_solve_left(cm, cn, &deficient);
  // Generous structural tolerance: the exact solution is structured, only
  // roundoff can perturb it, and from_adjoint averages that away.
  return {from_adjoint(y, kind, 1e-6), deficient};
}

}  // namespace

LstsqResult lstsq_direct(const QMatrix& m, const QMatrix& n) {
  return lstsq_adjoint_kind(m, n, AdjointKind::Direct);
}

LstsqResult lstsq_reverse(const QMatrix& m, const QMatrix& n) {
  return lstsq_adjoint_kind(m, n, AdjointKind::Reverse);
}

LstsqResult lstsq_real_constrained(const QMatrix& m, const QMatrix& n) {
  if (m.cols() != n.cols())
    throw ShapeError("lstsq_real_constrained: M and N need equal column counts");
  const Index p = m.cols();
  RMatrix ms(m.rows(), 4 * p), ns(n.rows(), 4 * p);
  for (int c = 0; c < 4; ++c) {
    ms.middleCols(c * p, p) = m.plane(c);
    ns.middleCols(c * p, p) = n.plane(c);
  }
  bool deficient = false;
  RMatrix xt = ls_solve<RMatrix>(ns.transpose(), ms.transpose(), &deficient);
  return {QMatrix::from_real(xt.transpose()), deficient};
}

CMatrix pinv_complex(const CMatrix& a, double tol) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double t = tol > 0.0
                       ? tol
                       : static_cast<double>(std::max(a.rows(), a.cols())) *
                             std::numeric_limits<double>::epsilon() * smax;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > t) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

QMatrix pinv(const QMatrix& a, AdjointKind kind, double tol) {
  if (kind != AdjointKind::Direct && kind != AdjointKind::Reverse)
    throw DomainError("pinv: kind must be Direct or Reverse");
  const CMatrix x = pinv_complex(adjoint(a, kind), tol);
  return from_adjoint(x, kind, 1e-8);
}

}  // namespace qten
