#include "qten/qmatrix.hpp"

#include <algorithm>
#include <cmath>

namespace qten {

namespace {

void require_same_shape(const QMatrix& a, const QMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch");
}

}  // namespace

QMatrix QMatrix::identity(Index n) {
  QMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = Quaternion(1.0);
  return m;
}

QMatrix QMatrix::from_real(const RMatrix& r) {
  QMatrix m(r.rows(), r.cols());
  for (Index i = 0; i < r.rows(); ++i)
    for (Index j = 0; j < r.cols(); ++j) m(i, j).w = r(i, j);
  return m;
}

RMatrix QMatrix::plane(int component) const {
  RMatrix p(rows_, cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index j = 0; j < cols_; ++j) {
      const Quaternion& q = (*this)(i, j);
      p(i, j) = component == 0 ? q.w : component == 1 ? q.x : component == 2 ? q.y : q.z;
    }
  return p;
}

void QMatrix::set_plane(int component, const RMatrix& p) {
  if (p.rows() != rows_ || p.cols() != cols_) throw ShapeError("set_plane: shape mismatch");
  for (Index i = 0; i < rows_; ++i)
    for (Index j = 0; j < cols_; ++j) {
      Quaternion& q = (*this)(i, j);
      (component == 0 ? q.w : component == 1 ? q.x : component == 2 ? q.y : q.z) = p(i, j);
    }
}

std::pair<CMatrix, CMatrix> QMatrix::cd_parts() const {
  CMatrix a1(rows_, cols_), a2(rows_, cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index j = 0; j < cols_; ++j) {
      const Quaternion& q = (*this)(i, j);
      a1(i, j) = {q.w, q.x};
      a2(i, j) = {q.y, q.z};
    }
  return {std::move(a1), std::move(a2)};
}

QMatrix QMatrix::from_cd_parts(const CMatrix& a1, const CMatrix& a2) {
  if (a1.rows() != a2.rows() || a1.cols() != a2.cols())
    throw ShapeError("from_cd_parts: shape mismatch");
  QMatrix m(a1.rows(), a1.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = {a1(i, j).real(), a1(i, j).imag(), a2(i, j).real(), a2(i, j).imag()};
  return m;
}

bool QMatrix::is_real() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const Quaternion& q) { return q.is_real(); });
}

QMatrix QMatrix::block(Index r0, Index c0, Index nrows, Index ncols) const {
  if (r0 < 0 || c0 < 0 || r0 + nrows > rows_ || c0 + ncols > cols_)
    throw ShapeError("block: out of range");
  QMatrix m(nrows, ncols);
  for (Index i = 0; i < nrows; ++i)
    for (Index j = 0; j < ncols; ++j) m(i, j) = (*this)(r0 + i, c0 + j);
  return m;
}

QMatrix operator+(const QMatrix& a, const QMatrix& b) {
  require_same_shape(a, b, "operator+");
  QMatrix r(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

QMatrix operator-(const QMatrix& a, const QMatrix& b) {
  require_same_shape(a, b, "operator-");
  QMatrix r(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

QMatrix operator*(const QMatrix& a, double s) {
  QMatrix r(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) * s;
  return r;
}

QMatrix matmul_direct(const QMatrix& a, const QMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul_direct: inner dimension mismatch");
  QMatrix r(a.rows(), b.cols());
  for (Index m = 0; m < a.rows(); ++m)
    for (Index n = 0; n < a.cols(); ++n) {
      const Quaternion& amn = a(m, n);
      for (Index p = 0; p < b.cols(); ++p) r(m, p) += amn * b(n, p);
    }
  return r;
}

QMatrix matmul_reverse(const QMatrix& a, const QMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul_reverse: inner dimension mismatch");
  QMatrix r(a.rows(), b.cols());
  for (Index m = 0; m < a.rows(); ++m)
    for (Index n = 0; n < a.cols(); ++n) {
      const Quaternion& amn = a(m, n);
      for (Index p = 0; p < b.cols(); ++p) r(m, p) += b(n, p) * amn;
    }
  return r;
}

QMatrix transpose(const QMatrix& a) {
  QMatrix r(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

QMatrix conjugate(const QMatrix& a) {
  QMatrix r(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) r(i, j) = conj(a(i, j));
  return r;
}

QMatrix conj_transpose(const QMatrix& a) {
  QMatrix r(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) r(j, i) = conj(a(i, j));
  return r;
}

QMatrix scale_cols_right(const QMatrix& a, const std::vector<Quaternion>& d) {
  if (static_cast<Index>(d.size()) != a.cols())
    throw ShapeError("scale_cols_right: diagonal length mismatch");
  QMatrix r(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) r(i, j) = a(i, j) * d[static_cast<std::size_t>(j)];
  return r;
}

QMatrix scale_cols_left(const QMatrix& a, const std::vector<Quaternion>& d) {
  if (static_cast<Index>(d.size()) != a.cols())
    throw ShapeError("scale_cols_left: diagonal length mismatch");
  QMatrix r(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) r(i, j) = d[static_cast<std::size_t>(j)] * a(i, j);
  return r;
}

QMatrix kron_direct(const QMatrix& a, const QMatrix& b) {
  QMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index m = 0; m < a.rows(); ++m)
    for (Index n = 0; n < a.cols(); ++n) {
      const Quaternion& amn = a(m, n);
      for (Index p = 0; p < b.rows(); ++p)
        for (Index q = 0; q < b.cols(); ++q)
          r(m * b.rows() + p, n * b.cols() + q) = amn * b(p, q);
    }
  return r;
}

QMatrix kron_reverse(const QMatrix& a, const QMatrix& b) {
  QMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index m = 0; m < a.rows(); ++m)
    for (Index n = 0; n < a.cols(); ++n) {
      const Quaternion& amn = a(m, n);
      for (Index p = 0; p < b.rows(); ++p)
        for (Index q = 0; q < b.cols(); ++q)
          r(m * b.rows() + p, n * b.cols() + q) = b(p, q) * amn;
    }
  return r;
}

namespace {

template <typename EntryProduct>
QMatrix khatri_rao_impl(const QMatrix& a, const QMatrix& b, EntryProduct prod) {
  if (a.cols() != b.cols()) throw ShapeError("khatri_rao: column count mismatch");
  QMatrix r(a.rows() * b.rows(), a.cols());
  for (Index f = 0; f < a.cols(); ++f)
    for (Index m = 0; m < a.rows(); ++m)
      for (Index p = 0; p < b.rows(); ++p)
        r(m * b.rows() + p, f) = prod(a(m, f), b(p, f));
  return r;
}

}  // namespace

QMatrix khatri_rao_direct(const QMatrix& a, const QMatrix& b) {
  return khatri_rao_impl(a, b, [](const Quaternion& p, const Quaternion& q) { return p * q; });
}

QMatrix khatri_rao_reverse(const QMatrix& a, const QMatrix& b) {
  return khatri_rao_impl(a, b, [](const Quaternion& p, const Quaternion& q) { return q * p; });
}

QMatrix hadamard(const QMatrix& a, const QMatrix& b) {
  require_same_shape(a, b, "hadamard");
  QMatrix r(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) * b(i, j);
  return r;
}

double frobenius_norm(const QMatrix& a) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s += abs_sq(a(i, j));
  return std::sqrt(s);
}

double max_abs_diff(const QMatrix& a, const QMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) m = std::max(m, abs(a(i, j) - b(i, j)));
  return m;
}

double max_abs(const QMatrix& a) {
  double m = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) m = std::max(m, abs(a(i, j)));
  return m;
}

CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("khatri_rao: column count mismatch");
  CMatrix r(a.rows() * b.rows(), a.cols());
  for (Index f = 0; f < a.cols(); ++f)
    for (Index m = 0; m < a.rows(); ++m)
      r.block(m * b.rows(), f, b.rows(), 1) = a(m, f) * b.col(f);
  return r;
}

}  // namespace qten
