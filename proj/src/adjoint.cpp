#include "qten/adjoint.hpp"

#include <algorithm>
#include <cmath>

namespace qten {

namespace {

bool is_columnwise(AdjointKind k) {
  return k == AdjointKind::DirectColumnwise || k == AdjointKind::ReverseColumnwise;
}

bool is_direct(AdjointKind k) {
  return k == AdjointKind::Direct || k == AdjointKind::DirectColumnwise;
}

void require_even(const CMatrix& x, AdjointKind kind) {
  if (x.rows() % 2 != 0 || x.cols() % 2 != 0)
    throw ShapeError("from_adjoint: dimensions must be even");
  (void)kind;
}

}  // namespace

CMatrix adjoint(const QMatrix& a, AdjointKind kind) {
  const auto [a1, a2] = a.cd_parts();
  const Index m = a.rows(), n = a.cols();
  CMatrix x(2 * m, 2 * n);
  switch (kind) {
    case AdjointKind::Direct:
      x.topLeftCorner(m, n) = a1;
      x.topRightCorner(m, n) = a2;
      x.bottomLeftCorner(m, n) = -a2.conjugate();
      x.bottomRightCorner(m, n) = a1.conjugate();
      break;
    case AdjointKind::Reverse:
      x.topLeftCorner(m, n) = a1;
      x.topRightCorner(m, n) = -a2.conjugate();
      x.bottomLeftCorner(m, n) = a2;
      x.bottomRightCorner(m, n) = a1.conjugate();
      break;
    case AdjointKind::DirectColumnwise:
      for (Index c = 0; c < n; ++c) {
        x.block(0, 2 * c, m, 1) = a1.col(c);
        x.block(0, 2 * c + 1, m, 1) = a2.col(c);
        x.block(m, 2 * c, m, 1) = -a2.col(c).conjugate();
        x.block(m, 2 * c + 1, m, 1) = a1.col(c).conjugate();
      }
      break;
    case AdjointKind::ReverseColumnwise:
      for (Index c = 0; c < n; ++c) {
        x.block(0, 2 * c, m, 1) = a1.col(c);
        x.block(0, 2 * c + 1, m, 1) = -a2.col(c).conjugate();
        x.block(m, 2 * c, m, 1) = a2.col(c);
        x.block(m, 2 * c + 1, m, 1) = a1.col(c).conjugate();
      }
      break;
  }
  return x;
}

double adjoint_structure_residual(const CMatrix& x, AdjointKind kind) {
  require_even(x, kind);
  const Index m = x.rows() / 2, n = x.cols() / 2;
  const double scale = std::max(x.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  auto check = [&](const CMatrix& p, const CMatrix& q) {
    // p should equal conj(q); records the worst violation.
    worst = std::max(worst, (p - q.conjugate()).cwiseAbs().maxCoeff());
  };
  if (!is_columnwise(kind)) {
    if (is_direct(kind)) {
      check(x.bottomRightCorner(m, n), x.topLeftCorner(m, n));
      check(x.bottomLeftCorner(m, n), -x.topRightCorner(m, n));
    } else {
      check(x.bottomRightCorner(m, n), x.topLeftCorner(m, n));
      check(x.topRightCorner(m, n), -x.bottomLeftCorner(m, n));
    }
  } else {
    for (Index c = 0; c < n; ++c) {
      if (is_direct(kind)) {
        check(x.block(m, 2 * c + 1, m, 1), x.block(0, 2 * c, m, 1));
        check(x.block(m, 2 * c, m, 1), -x.block(0, 2 * c + 1, m, 1));
      } else {
        check(x.block(m, 2 * c + 1, m, 1), x.block(0, 2 * c, m, 1));
        check(x.block(0, 2 * c + 1, m, 1), -x.block(m, 2 * c, m, 1));
      }
    }
  }
  return worst / scale;
}

QMatrix from_adjoint(const CMatrix& x, AdjointKind kind, double tol) {
  require_even(x, kind);
  const double res = adjoint_structure_residual(x, kind);
  if (!(res <= tol))
    throw StructureError("from_adjoint: block structure violated (relative residual " +
                             std::to_string(res) + ")",
                         res);
  const Index m = x.rows() / 2, n = x.cols() / 2;
  CMatrix a1(m, n), a2(m, n);
  if (!is_columnwise(kind)) {
    if (is_direct(kind)) {
      a1 = 0.5 * (x.topLeftCorner(m, n) + x.bottomRightCorner(m, n).conjugate());
      a2 = 0.5 * (x.topRightCorner(m, n) - x.bottomLeftCorner(m, n).conjugate());
    } else {
      a1 = 0.5 * (x.topLeftCorner(m, n) + x.bottomRightCorner(m, n).conjugate());
      a2 = 0.5 * (x.bottomLeftCorner(m, n) - x.topRightCorner(m, n).conjugate());
    }
  } else {
    for (Index c = 0; c < n; ++c) {
      if (is_direct(kind)) {
        a1.col(c) = 0.5 * (x.block(0, 2 * c, m, 1) + x.block(m, 2 * c + 1, m, 1).conjugate());
        a2.col(c) = 0.5 * (x.block(0, 2 * c + 1, m, 1) - x.block(m, 2 * c, m, 1).conjugate());
      } else {
        a1.col(c) = 0.5 * (x.block(0, 2 * c, m, 1) + x.block(m, 2 * c + 1, m, 1).conjugate());
        a2.col(c) = 0.5 * (x.block(m, 2 * c, m, 1) - x.block(0, 2 * c + 1, m, 1).conjugate());
      }
    }
  }
  return QMatrix::from_cd_parts(a1, a2);
}

RMatrix adjoint_column_permutation(Index n) {
  RMatrix p = RMatrix::Zero(2 * n, 2 * n);
  for (Index c = 0; c < n; ++c) {
    p(2 * c, c) = 1.0;
    p(2 * c + 1, n + c) = 1.0;
  }
  return p;
}

}  // namespace qten
