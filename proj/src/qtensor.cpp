#include "qten/qtensor.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "qten/detail/io.hpp"

namespace qten {

static_assert(std::endian::native == std::endian::little,
              "QT1 serialization assumes a little-endian host");

ModeRole mode_role(Index mode, Index order) {
  if (mode < 0 || mode >= order) throw ShapeError("mode out of range");
  if (mode == 0) return ModeRole::FirstDirect;
  if (mode == order - 1) return ModeRole::LastReverse;
  return ModeRole::CentralReal;
}

QTensor::QTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 3) throw ShapeError("QTensor order must be at least 3");
  Index n = 1;
  for (Index d : dims_) {
    if (d < 1) throw ShapeError("QTensor dimensions must be positive");
    n *= d;
  }
  data_.assign(static_cast<std::size_t>(n), Quaternion{});
}

std::size_t QTensor::linear_index(const std::vector<Index>& idx) const {
  if (idx.size() != dims_.size()) throw ShapeError("index order mismatch");
  std::size_t lin = 0, stride = 1;
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    if (idx[d] < 0 || idx[d] >= dims_[d]) throw ShapeError("index out of range");
    lin += static_cast<std::size_t>(idx[d]) * stride;
    stride *= static_cast<std::size_t>(dims_[d]);
  }
  return lin;
}

Quaternion& QTensor::at3(Index i, Index j, Index k) {
  return data_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
}

const Quaternion& QTensor::at3(Index i, Index j, Index k) const {
  return data_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
}

QTensor operator+(const QTensor& a, const QTensor& b) {
  if (a.dims() != b.dims()) throw ShapeError("tensor addition: shape mismatch");
  QTensor r(a.dims());
  for (Index i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

QTensor operator-(const QTensor& a, const QTensor& b) {
  if (a.dims() != b.dims()) throw ShapeError("tensor subtraction: shape mismatch");
  QTensor r(a.dims());
  for (Index i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

QTensor operator*(const QTensor& a, double s) {
  QTensor r(a.dims());
  for (Index i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

namespace {

// Row index and unfolding column for every linear position of the tensor,
// streamed in storage order by incrementing the multi-index.
template <typename Visit>
void walk_unfolding(const std::vector<Index>& dims, Index mode, Visit visit) {
  const Index order = static_cast<Index>(dims.size());
  std::vector<Index> jstride(dims.size(), 0);
  Index j = 1;
  for (Index k = 0; k < order; ++k) {
    if (k == mode) continue;
    jstride[static_cast<std::size_t>(k)] = j;
    j *= dims[static_cast<std::size_t>(k)];
  }
  std::vector<Index> idx(dims.size(), 0);
  Index total = 1;
  for (Index d : dims) total *= d;
  Index row = 0, col = 0;
  for (Index lin = 0; lin < total; ++lin) {
    visit(lin, row, col);
    for (std::size_t d = 0; d < dims.size(); ++d) {
      Index& id = idx[d];
      const Index step = (static_cast<Index>(d) == mode) ? 1 : 0;
      if (step)
        ++row;
      else
        col += jstride[d];
      if (++id < dims[d]) break;
      id = 0;
      if (step)
        row = 0;
      else
        col -= jstride[d] * dims[d];
    }
  }
}

}  // namespace

QMatrix unfold(const QTensor& t, Index mode) {
  const Index order = t.order();
  if (mode < 0 || mode >= order) throw ShapeError("unfold: mode out of range");
  const Index nd = t.dims()[static_cast<std::size_t>(mode)];
  QMatrix m(nd, t.size() / nd);
  walk_unfolding(t.dims(), mode,
                 [&](Index lin, Index row, Index col) { m(row, col) = t[lin]; });
  return m;
}

QTensor fold(const QMatrix& m, Index mode, const std::vector<Index>& dims) {
  QTensor t(dims);
  const Index order = t.order();
  if (mode < 0 || mode >= order) throw ShapeError("fold: mode out of range");
  const Index nd = dims[static_cast<std::size_t>(mode)];
  if (m.rows() != nd || m.cols() != t.size() / nd)
    throw ShapeError("fold: matrix shape inconsistent with dims");
  walk_unfolding(dims, mode,
                 [&](Index lin, Index row, Index col) { t[lin] = m(row, col); });
  return t;
}

QTensor mode_product(const QTensor& t, Index mode, const QMatrix& u) {
  const Index order = t.order();
  const ModeRole role = mode_role(mode, order);
  if (u.cols() != t.dims()[static_cast<std::size_t>(mode)])
    throw ShapeError("mode_product: coefficient columns must match mode dimension");
  if (role == ModeRole::CentralReal && !u.is_real())
    throw DomainError("mode_product: central modes require an exactly real coefficient matrix");
  std::vector<Index> out_dims = t.dims();
  out_dims[static_cast<std::size_t>(mode)] = u.rows();
  const QMatrix unf = unfold(t, mode);
  QMatrix prod = (role == ModeRole::LastReverse) ? matmul_reverse(u, unf)
                                                 : matmul_direct(u, unf);
  return fold(prod, mode, out_dims);
}

QTensor mode_product(const QTensor& t, Index mode, const RMatrix& u) {
  return mode_product(t, mode, QMatrix::from_real(u));
}

QTensor change_of_basis(const QTensor& t, const std::vector<QMatrix>& us) {
  if (static_cast<Index>(us.size()) != t.order())
    throw ShapeError("change_of_basis: one coefficient matrix slot per mode");
  QTensor r = t;
  for (Index d = 0; d < t.order(); ++d) {
    const QMatrix& u = us[static_cast<std::size_t>(d)];
    if (u.rows() == 0) continue;
    r = mode_product(r, d, u);
  }
  return r;
}

QMatrix slice(const QTensor& t, SliceKind kind, Index index) {
  if (t.order() != 3) throw ShapeError("slice: order-3 tensors only");
  const auto& d = t.dims();
  switch (kind) {
    case SliceKind::Horizontal: {
      if (index < 0 || index >= d[0]) throw ShapeError("slice index out of range");
      QMatrix m(d[1], d[2]);
      for (Index j = 0; j < d[1]; ++j)
        for (Index k = 0; k < d[2]; ++k) m(j, k) = t.at3(index, j, k);
      return m;
    }
    case SliceKind::Lateral: {
      if (index < 0 || index >= d[1]) throw ShapeError("slice index out of range");
      QMatrix m(d[0], d[2]);
      for (Index i = 0; i < d[0]; ++i)
        for (Index k = 0; k < d[2]; ++k) m(i, k) = t.at3(i, index, k);
      return m;
    }
    case SliceKind::Frontal: {
      if (index < 0 || index >= d[2]) throw ShapeError("slice index out of range");
      QMatrix m(d[0], d[1]);
      for (Index i = 0; i < d[0]; ++i)
        for (Index j = 0; j < d[1]; ++j) m(i, j) = t.at3(i, j, index);
      return m;
    }
  }
  throw ShapeError("slice: unknown kind");
}

double frobenius_norm(const QTensor& t) {
  double s = 0.0;
  for (Index i = 0; i < t.size(); ++i) s += abs_sq(t[i]);
  return std::sqrt(s);
}

double max_abs_diff(const QTensor& a, const QTensor& b) {
  if (a.dims() != b.dims()) throw ShapeError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, abs(a[i] - b[i]));
  return m;
}

namespace {

using detail::read_u64;
using detail::write_u64;

void write_plane(std::ostream& os, const QTensor& t, int component) {
  std::vector<double> plane(static_cast<std::size_t>(t.size()));
  for (Index i = 0; i < t.size(); ++i) {
    const Quaternion& q = t[i];
    plane[static_cast<std::size_t>(i)] =
        component == 0 ? q.w : component == 1 ? q.x : component == 2 ? q.y : q.z;
  }
  os.write(reinterpret_cast<const char*>(plane.data()),
           static_cast<std::streamsize>(plane.size() * sizeof(double)));
}

void read_plane(std::istream& is, QTensor& t, int component) {
  std::vector<double> plane(static_cast<std::size_t>(t.size()));
  is.read(reinterpret_cast<char*>(plane.data()),
          static_cast<std::streamsize>(plane.size() * sizeof(double)));
  for (Index i = 0; i < t.size(); ++i) {
    Quaternion& q = t[i];
    double v = plane[static_cast<std::size_t>(i)];
    (component == 0 ? q.w : component == 1 ? q.x : component == 2 ? q.y : q.z) = v;
  }
}

}  // namespace

void save_qt1(const QTensor& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("QTN1", 4);
  const unsigned char order = static_cast<unsigned char>(t.order());
  os.write(reinterpret_cast<const char*>(&order), 1);
  for (Index d : t.dims()) write_u64(os, static_cast<std::uint64_t>(d));
  for (int c = 0; c < 4; ++c) write_plane(os, t, c);
  if (!os) throw IoError("write failed: " + path);
}

QTensor load_qt1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "QTN1", 4) != 0)
    throw IoError("not a QT1 tensor file: " + path);
  unsigned char order = 0;
  is.read(reinterpret_cast<char*>(&order), 1);
  if (!is || order < 3) throw IoError("QT1 header corrupt: " + path);
  std::vector<Index> dims(order);
  for (auto& d : dims) d = static_cast<Index>(read_u64(is));
  if (!is) throw IoError("QT1 header truncated: " + path);
  QTensor t(dims);
  for (int c = 0; c < 4; ++c) read_plane(is, t, c);
  if (!is) throw IoError("QT1 payload truncated: " + path);
  return t;
}

}  // namespace qten
