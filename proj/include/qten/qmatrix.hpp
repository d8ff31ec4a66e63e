#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qten/errors.hpp"
#include "qten/quaternion.hpp"

namespace qten {

using Index = Eigen::Index;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

/// Dense quaternion matrix, row-major.
///
/// Quaternion matrix multiplication comes in two flavours because the
/// scalars do not commute:
///   direct   (A *> B)[m,p] = sum_n A[m,n] * B[n,p]
///   reverse  (A *< B)[m,p] = sum_n B[n,p] * A[m,n]
/// The two coincide whenever either factor is real.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw ShapeError("QMatrix dimensions must be positive");
    data_.assign(static_cast<std::size_t>(rows * cols), Quaternion{});
  }

  static QMatrix identity(Index n);
  /// Embeds a real matrix.
  static QMatrix from_real(const RMatrix& m);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  Quaternion& operator()(Index r, Index c) {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }
  const Quaternion& operator()(Index r, Index c) const {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

  /// One real component plane (0:w, 1:x, 2:y, 3:z) as a real matrix.
  RMatrix plane(int component) const;
  void set_plane(int component, const RMatrix& p);

  /// Cayley-Dickson parts (A1, A2) with A = A1 + A2*j, entrywise.
  std::pair<CMatrix, CMatrix> cd_parts() const;
  static QMatrix from_cd_parts(const CMatrix& a1, const CMatrix& a2);

  /// Exactly real entries (x = y = z = 0 bitwise)?
  bool is_real() const;
  RMatrix real_part() const { return plane(0); }

  QMatrix block(Index r0, Index c0, Index nrows, Index ncols) const;
  QMatrix col(Index c) const { return block(0, c, rows_, 1); }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Quaternion> data_;
};

QMatrix operator+(const QMatrix& a, const QMatrix& b);
QMatrix operator-(const QMatrix& a, const QMatrix& b);
QMatrix operator*(const QMatrix& a, double s);

/// (A *> B)[m,p] = sum_n A[m,n] B[n,p]
QMatrix matmul_direct(const QMatrix& a, const QMatrix& b);
/// (A *< B)[m,p] = sum_n B[n,p] A[m,n]
QMatrix matmul_reverse(const QMatrix& a, const QMatrix& b);

QMatrix transpose(const QMatrix& a);
QMatrix conjugate(const QMatrix& a);
/// Conjugate transpose A^H.
QMatrix conj_transpose(const QMatrix& a);

/// Column scaling from the right: column f of the result is A[:,f] * d[f].
QMatrix scale_cols_right(const QMatrix& a, const std::vector<Quaternion>& d);
/// Column scaling from the left: column f of the result is d[f] * A[:,f].
QMatrix scale_cols_left(const QMatrix& a, const std::vector<Quaternion>& d);

/// Kronecker products; block (m,n) is a[m,n]*B (direct) or B*a[m,n] (reverse).
QMatrix kron_direct(const QMatrix& a, const QMatrix& b);
QMatrix kron_reverse(const QMatrix& a, const QMatrix& b);

/// Khatri-Rao (column-wise Kronecker); requires equal column counts.
QMatrix khatri_rao_direct(const QMatrix& a, const QMatrix& b);
QMatrix khatri_rao_reverse(const QMatrix& a, const QMatrix& b);

/// Hadamard (entrywise direct) product.
QMatrix hadamard(const QMatrix& a, const QMatrix& b);

double frobenius_norm(const QMatrix& a);
/// Largest entry modulus of a - b.
double max_abs_diff(const QMatrix& a, const QMatrix& b);
double max_abs(const QMatrix& a);

/// Complex Khatri-Rao, used on adjoint-domain factors.
CMatrix khatri_rao(const CMatrix& a, const CMatrix& b);

}  // namespace qten
