#pragma once

#include <string>
#include <vector>

#include "qten/qmatrix.hpp"

namespace qten {

/// Role a mode plays under n-mode products. Quaternion coefficients act
/// from the left on the first mode and from the right on the last; the
/// central modes only admit real coefficient matrices, because a quaternion
/// there has no consistent side to act from.
enum class ModeRole { FirstDirect, CentralReal, LastReverse };

ModeRole mode_role(Index mode, Index order);

/// Dense order-D quaternion tensor, D >= 3, column-major storage
/// (first index fastest).
class QTensor {
 public:
  explicit QTensor(std::vector<Index> dims);

  Index order() const { return static_cast<Index>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index size() const { return static_cast<Index>(data_.size()); }

  Quaternion& operator[](Index linear) { return data_[static_cast<std::size_t>(linear)]; }
  const Quaternion& operator[](Index linear) const {
    return data_[static_cast<std::size_t>(linear)];
  }

  Quaternion& at(const std::vector<Index>& idx) { return data_[linear_index(idx)]; }
  const Quaternion& at(const std::vector<Index>& idx) const {
    return data_[linear_index(idx)];
  }

  /// Order-3 convenience accessor.
  Quaternion& at3(Index i, Index j, Index k);
  const Quaternion& at3(Index i, Index j, Index k) const;

  std::size_t linear_index(const std::vector<Index>& idx) const;

 private:
  std::vector<Index> dims_;
  std::vector<Quaternion> data_;
};

QTensor operator+(const QTensor& a, const QTensor& b);
QTensor operator-(const QTensor& a, const QTensor& b);
QTensor operator*(const QTensor& a, double s);

/// Mode-d unfolding (zero-based d): entry (i_0,...,i_{D-1}) lands in row i_d,
/// column sum_{k != d} i_k * J_k with J_k = prod_{m < k, m != d} N_m.
QMatrix unfold(const QTensor& t, Index mode);

/// Inverse of unfold for the given mode and dims.
QTensor fold(const QMatrix& m, Index mode, const std::vector<Index>& dims);

/// n-mode product. The coefficient side follows the mode's role:
///   first mode   T x_0 U : coefficients act from the left (direct)
///   central mode T x_d U : U must be exactly real, else DomainError
///   last mode    T x_D U : coefficients act from the right (reverse)
/// U must have cols == dims[mode]; the result replaces that dimension by
/// U.rows(). In unfolding terms: unfold(result, d) = U *> unfold(T, d)
/// for the first mode, U * unfold for central, U *< unfold for the last.
QTensor mode_product(const QTensor& t, Index mode, const QMatrix& u);
QTensor mode_product(const QTensor& t, Index mode, const RMatrix& u);

/// Tucker-style multi-mode change of basis: applies mode_product for every
/// listed matrix in ascending mode order. Empty (default-constructed)
/// entries are skipped. us.size() must equal the tensor order.
QTensor change_of_basis(const QTensor& t, const std::vector<QMatrix>& us);

enum class SliceKind { Horizontal, Lateral, Frontal };

/// Order-3 slices: horizontal fixes i_0 (rows i_1, cols i_2), lateral fixes
/// i_1 (rows i_0, cols i_2), frontal fixes i_2 (rows i_0, cols i_1).
QMatrix slice(const QTensor& t, SliceKind kind, Index index);

double frobenius_norm(const QTensor& t);
double max_abs_diff(const QTensor& a, const QTensor& b);

/// Binary tensor file, format QT1: magic "QTN1", u8 order, order x u64 dims,
/// then four contiguous float64 component planes (w, x, y, z), each in
/// column-major entry order. All integers and floats little-endian.
void save_qt1(const QTensor& t, const std::string& path);
QTensor load_qt1(const std::string& path);

}  // namespace qten
