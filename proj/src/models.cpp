#include "qten/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "qten/detail/io.hpp"
#include "qten/lstsq.hpp"
#include "qten/rng.hpp"

namespace qten {

namespace {

using std::complex;
using Cd = complex<double>;

}  // namespace

QTensor tucker_reconstruct(const TuckerModel& m) {
  if (m.core.order() != 3) throw ShapeError("tucker_reconstruct: order-3 core expected");
  QTensor t = mode_product(m.core, 0, m.a);
  t = mode_product(t, 1, m.b);
  return mode_product(t, 2, m.c);
}

CpdFactors::CpdFactors(QMatrix a_, RMatrix b_, QMatrix c_)
    : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) {
  const Index f = a.cols();
  if (b.cols() != f || c.cols() != f)
    throw ShapeError("CpdFactors: factors must share the component count");
  for (Index g = 0; g < f; ++g) {
    bool za = true, zb = true, zc = true;
    for (Index i = 0; i < a.rows() && za; ++i) za = a(i, g).is_zero();
    for (Index i = 0; i < b.rows() && zb; ++i) zb = b(i, g) == 0.0;
    for (Index i = 0; i < c.rows() && zc; ++i) zc = c(i, g).is_zero();
    if (za || zb || zc)
      throw DomainError("CpdFactors: all-zero factor column (degenerate component)");
  }
}

QTensor cpd_reconstruct(const CpdFactors& f) {
  const Index n1 = f.a.rows(), n2 = f.b.rows(), n3 = f.c.rows();
  QTensor t({n1, n2, n3});
  for (Index g = 0; g < f.a.cols(); ++g)
    for (Index k = 0; k < n3; ++k)
      for (Index j = 0; j < n2; ++j) {
        const double bj = f.b(j, g);
        for (Index i = 0; i < n1; ++i)
          t.at3(i, j, k) += (f.a(i, g) * f.c(k, g)) * bj;
      }
  return t;
}

QMatrix cpd_unfolding(const CpdFactors& f, Index mode) {
  const QMatrix bq = QMatrix::from_real(f.b);
  switch (mode) {
    case 0:
      return matmul_direct(f.a, transpose(khatri_rao_direct(f.c, bq)));
    case 1:
      return matmul_direct(bq, transpose(khatri_rao_reverse(f.c, f.a)));
    case 2:
      return matmul_reverse(f.c, transpose(khatri_rao_direct(bq, f.a)));
    default:
      throw ShapeError("cpd_unfolding: mode out of range");
  }
}

namespace {

QMatrix diag_of_row(const QMatrix& m, Index row) {
  QMatrix d(m.cols(), m.cols());
  for (Index f = 0; f < m.cols(); ++f) d(f, f) = m(row, f);
  return d;
}

}  // namespace

QMatrix cpd_slice(const CpdFactors& f, SliceKind kind, Index index) {
  const QMatrix bq = QMatrix::from_real(f.b);
  switch (kind) {
    case SliceKind::Horizontal: {
      if (index < 0 || index >= f.a.rows()) throw ShapeError("cpd_slice: index out of range");
      return matmul_direct(bq, matmul_direct(diag_of_row(f.a, index), transpose(f.c)));
    }
    case SliceKind::Lateral: {
      if (index < 0 || index >= bq.rows()) throw ShapeError("cpd_slice: index out of range");
      return matmul_direct(matmul_direct(f.a, diag_of_row(bq, index)), transpose(f.c));
    }
    case SliceKind::Frontal: {
      if (index < 0 || index >= f.c.rows()) throw ShapeError("cpd_slice: index out of range");
      return matmul_direct(matmul_direct(f.a, diag_of_row(f.c, index)), transpose(bq));
    }
  }
  throw ShapeError("cpd_slice: unknown kind");
}

double scaling_admissibility_residual(const ScalingTriple& s) {
  if (s.alpha.size() != s.beta.size() || s.alpha.size() != s.gamma.size())
    throw ShapeError("ScalingTriple: component count mismatch");
  double worst = 0.0;
  for (std::size_t f = 0; f < s.alpha.size(); ++f) {
    const Quaternion prod = s.alpha[f] * s.gamma[f] * s.beta[f];
    worst = std::max(worst, abs(prod - Quaternion(1.0)));
  }
  return worst;
}

CpdFactors apply_scaling(const CpdFactors& f, const ScalingTriple& s,
                         const std::vector<Index>& perm, double tol) {
  const Index nf = f.a.cols();
  if (static_cast<Index>(s.alpha.size()) != nf ||
      static_cast<Index>(perm.size()) != nf)
    throw ShapeError("apply_scaling: component count mismatch");
  std::vector<bool> seen(static_cast<std::size_t>(nf), false);
  for (Index g : perm) {
    if (g < 0 || g >= nf || seen[static_cast<std::size_t>(g)])
      throw ShapeError("apply_scaling: not a permutation");
    seen[static_cast<std::size_t>(g)] = true;
  }
  const double res = scaling_admissibility_residual(s);
  if (!(res <= tol))
    throw InvalidScalingError("apply_scaling: inadmissible triple, residual " +
                              std::to_string(res));
  QMatrix a(f.a.rows(), nf), c(f.c.rows(), nf);
  RMatrix b(f.b.rows(), nf);
  for (Index g = 0; g < nf; ++g) {
    const std::size_t src = static_cast<std::size_t>(perm[static_cast<std::size_t>(g)]);
    const Index sf = static_cast<Index>(src);
    for (Index i = 0; i < f.a.rows(); ++i) a(i, g) = f.a(i, sf) * s.alpha[src];
    for (Index i = 0; i < f.b.rows(); ++i) b(i, g) = f.b(i, sf) * s.beta[src];
    for (Index i = 0; i < f.c.rows(); ++i) c(i, g) = s.gamma[src] * f.c(i, sf);
  }
  return CpdFactors(std::move(a), std::move(b), std::move(c));
}

namespace {

// Min-cost perfect assignment on an n x n matrix (Hungarian algorithm,
// shortest augmenting paths with potentials). Returns row -> column.
std::vector<Index> hungarian(const RMatrix& cost) {
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> way(static_cast<std::size_t>(n) + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> match(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0)
      match[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return match;
}

double col_norm_sq(const QMatrix& m, Index c) {
  double s = 0.0;
  for (Index i = 0; i < m.rows(); ++i) s += abs_sq(m(i, c));
  return s;
}

}  // namespace

AlignmentResult align_factors(const CpdFactors& estimate, const CpdFactors& truth) {
  const Index nf = truth.a.cols();
  if (estimate.a.cols() != nf || estimate.a.rows() != truth.a.rows() ||
      estimate.b.rows() != truth.b.rows() || estimate.c.rows() != truth.c.rows())
    throw ShapeError("align_factors: estimate/truth shape mismatch");

  // Match components on the real middle factor, where the scaling ambiguity
  // is only a real scalar and |correlation| is permutation-revealing.
  RMatrix cost(nf, nf);
  for (Index f = 0; f < nf; ++f)
    for (Index g = 0; g < nf; ++g) {
      const double num = std::abs(truth.b.col(f).dot(estimate.b.col(g)));
      const double den = truth.b.col(f).norm() * estimate.b.col(g).norm();
      cost(f, g) = den > 0.0 ? -num / den : 0.0;
    }
  const std::vector<Index> match = hungarian(cost);

  QMatrix a(truth.a.rows(), nf), c(truth.c.rows(), nf);
  RMatrix b(truth.b.rows(), nf);
  for (Index f = 0; f < nf; ++f) {
    const Index g = match[static_cast<std::size_t>(f)];
    // Right quaternion scalar on A: argmin_q || a_f - a_hat_g * q ||.
    Quaternion qa{};
    const double na = col_norm_sq(estimate.a, g);
    for (Index i = 0; i < truth.a.rows(); ++i)
      qa += conj(estimate.a(i, g)) * truth.a(i, f);
    if (na > 0.0) qa = qa * (1.0 / na);
    for (Index i = 0; i < truth.a.rows(); ++i) a(i, f) = estimate.a(i, g) * qa;
    // Real scalar on B.
    const double nb = estimate.b.col(g).squaredNorm();
    const double sb = nb > 0.0 ? truth.b.col(f).dot(estimate.b.col(g)) / nb : 0.0;
    b.col(f) = estimate.b.col(g) * sb;
    // Left quaternion scalar on C: argmin_q || c_f - q * c_hat_g ||.
    Quaternion qc{};
    const double nc = col_norm_sq(estimate.c, g);
    for (Index i = 0; i < truth.c.rows(); ++i)
      qc += truth.c(i, f) * conj(estimate.c(i, g));
    if (nc > 0.0) qc = qc * (1.0 / nc);
    for (Index i = 0; i < truth.c.rows(); ++i) c(i, f) = qc * estimate.c(i, g);
  }

  AlignmentResult r;
  r.permutation = match;
  const double ea = frobenius_norm(a - truth.a), ta = frobenius_norm(truth.a);
  const RMatrix db = b - truth.b;
  const double eb = db.norm(), tb = truth.b.norm();
  const double ec = frobenius_norm(c - truth.c), tc = frobenius_norm(truth.c);
  r.nmse = {ea * ea / (ta * ta), eb * eb / (tb * tb), ec * ec / (tc * tc)};
  r.rel_rmse = {ea / ta, eb / tb, ec / tc};
  r.aligned.a = std::move(a);
  r.aligned.b = std::move(b);
  r.aligned.c = std::move(c);
  return r;
}

std::vector<CMatrix> adjoint_tensor(const QTensor& t) {
  if (t.order() != 3) throw ShapeError("adjoint_tensor: order-3 tensors only");
  std::vector<CMatrix> lateral;
  lateral.reserve(static_cast<std::size_t>(t.dims()[1]));
  for (Index j = 0; j < t.dims()[1]; ++j)
    lateral.push_back(adjoint(slice(t, SliceKind::Lateral, j), AdjointKind::Direct));
  return lateral;
}

ConfacModel confac_from_cpd(const CpdFactors& f) {
  const Index nf = f.a.cols();
  const auto [a1, a2] = f.a.cd_parts();
  const auto [c1, c2] = f.c.cd_parts();
  ConfacModel m;
  m.u.resize(f.a.rows(), 2 * nf);
  m.u << a1, a2;
  m.w.resize(f.c.rows(), 2 * nf);
  m.w << c2, c1.conjugate();
  m.b = f.b;
  m.psi = RMatrix::Zero(2 * nf, 2 * nf);
  m.psi.topRightCorner(nf, nf) = RMatrix::Identity(nf, nf);
  m.psi.bottomLeftCorner(nf, nf) = -RMatrix::Identity(nf, nf);
  m.phi.resize(nf, 2 * nf);
  m.phi << RMatrix::Identity(nf, nf), RMatrix::Identity(nf, nf);
  m.omega = -m.psi;
  return m;
}

QMatrix confac_factor_a(const CMatrix& u) {
  if (u.cols() % 2 != 0) throw ShapeError("confac_factor_a: even column count expected");
  const Index nf = u.cols() / 2;
  return QMatrix::from_cd_parts(u.leftCols(nf), u.rightCols(nf));
}

QMatrix confac_factor_c(const CMatrix& w) {
  if (w.cols() % 2 != 0) throw ShapeError("confac_factor_c: even column count expected");
  const Index nf = w.cols() / 2;
  return QMatrix::from_cd_parts(w.rightCols(nf).conjugate(), w.leftCols(nf));
}

CdParts cayley_dickson_parts(const QTensor& t) {
  if (t.order() != 3) throw ShapeError("cayley_dickson_parts: order-3 tensors only");
  CdParts p;
  p.dims = {t.dims()[0], t.dims()[1], t.dims()[2]};
  p.t1.resize(static_cast<std::size_t>(t.size()));
  p.t2.resize(static_cast<std::size_t>(t.size()));
  for (Index i = 0; i < t.size(); ++i) {
    const Quaternion& q = t[i];
    p.t1[static_cast<std::size_t>(i)] = {q.w, q.x};
    p.t2[static_cast<std::size_t>(i)] = {q.y, q.z};
  }
  return p;
}

namespace {

// chi_>(A) assembled from the CONFAC block U = [A1 A2].
CMatrix chi_direct_from_u(const CMatrix& u, const RMatrix& psi) {
  CMatrix x(2 * u.rows(), u.cols());
  x.topRows(u.rows()) = u;
  x.bottomRows(u.rows()) = u.conjugate() * psi;
  return x;
}

// chi_<(C) assembled from the CONFAC block W = [C2 conj(C1)].
CMatrix chi_reverse_from_w(const CMatrix& w, const RMatrix& omega) {
  CMatrix x(2 * w.rows(), w.cols());
  x.topRows(w.rows()) = w.conjugate() * omega;
  x.bottomRows(w.rows()) = w;
  return x;
}

}  // namespace

ConfacUnfoldings confac_unfoldings(const ConfacModel& m, const CdParts& parts) {
  const Index n1 = parts.dims[0], n2 = parts.dims[1], n3 = parts.dims[2];
  if (m.u.rows() != n1 || m.b.rows() != n2 || m.w.rows() != n3)
    throw ShapeError("confac_unfoldings: model/tensor shape mismatch");
  const CMatrix chi_a = chi_direct_from_u(m.u, m.psi);
  const CMatrix chi_c = chi_reverse_from_w(m.w, m.omega);
  const CMatrix bphi = (m.b * m.phi).cast<Cd>();

  ConfacUnfoldings r;
  r.ta = m.u * khatri_rao(chi_c, bphi).transpose();
  r.tb = bphi * khatri_rao(chi_a, m.w).transpose();
  r.tc = m.w * khatri_rao(chi_a, bphi).transpose();

  auto lin = [&](Index i1, Index i2, Index i3) {
    return static_cast<std::size_t>(i1 + n1 * (i2 + n2 * i3));
  };
  CMatrix ta(n1, 2 * n2 * n3), tb(n2, 2 * n1 * n3), tc(n3, 2 * n1 * n2);
  for (Index i3 = 0; i3 < n3; ++i3)
    for (Index i2 = 0; i2 < n2; ++i2)
      for (Index i1 = 0; i1 < n1; ++i1) {
        const Cd v1 = parts.t1[lin(i1, i2, i3)];
        const Cd v2 = parts.t2[lin(i1, i2, i3)];
        ta(i1, i3 * n2 + i2) = v1;
        ta(i1, n3 * n2 + i3 * n2 + i2) = v2;
        tb(i2, i1 * n3 + i3) = v2;
        tb(i2, n1 * n3 + i1 * n3 + i3) = std::conj(v1);
        tc(i3, i1 * n2 + i2) = v2;
        tc(i3, n1 * n2 + i1 * n2 + i2) = std::conj(v1);
      }
  r.residual_a = (r.ta - ta).cwiseAbs().maxCoeff();
  r.residual_b = (r.tb - tb).cwiseAbs().maxCoeff();
  r.residual_c = (r.tc - tc).cwiseAbs().maxCoeff();
  return r;
}

namespace {

bool no_proportional_columns(const RMatrix& b, double angle_tol) {
  for (Index f = 0; f < b.cols(); ++f)
    if (b.col(f).norm() == 0.0) return false;
  for (Index f = 0; f < b.cols(); ++f)
    for (Index g = f + 1; g < b.cols(); ++g) {
      const Eigen::VectorXd bf = b.col(f);
      const Eigen::VectorXd bg = b.col(g);
      // sin of the angle via the rejection, stable near parallel columns.
      const Eigen::VectorXd rej = bg - bf * (bf.dot(bg) / bf.squaredNorm());
      if (rej.norm() / bg.norm() < angle_tol) return false;
    }
  return true;
}

}  // namespace

UniquenessReport certify_uniqueness(const CpdFactors& f, const CertifyOptions& opts) {
  UniquenessReport r;
  r.f = f.a.cols();
  const Index n1 = f.a.rows(), n3 = f.c.rows();
  r.rrank_a = rank_right(f.a, opts.tol);
  r.lrank_c = rank_left(f.c, opts.tol);
  r.krank_b = kruskal_rank_real(f.b, opts.tol, opts.krank, opts.guard);
  r.rkrank_a = kruskal_rank_right(f.a, opts.tol, opts.krank, opts.guard);
  r.lkrank_c = kruskal_rank_left(f.c, opts.tol, opts.krank, opts.guard);
  r.b_no_proportional_columns = no_proportional_columns(f.b, opts.proportional_angle);
  const Index ff = r.f;
  r.condition[0] = r.rrank_a == ff && r.lrank_c == ff && r.b_no_proportional_columns;
  r.condition[1] = r.krank_b == ff && r.rkrank_a + r.lkrank_c >= ff + 2;
  r.condition[2] = r.rkrank_a == ff && r.krank_b + r.lkrank_c >= ff + 2;
  r.condition[3] = r.lkrank_c == ff && r.rkrank_a + r.krank_b >= ff + 2;
  r.condition[4] = n1 * n3 >= ff && r.rkrank_a + r.krank_b + r.lkrank_c >= 2 * ff + 2;
  r.certified = r.condition[0] || r.condition[1] || r.condition[2] ||
                r.condition[3] || r.condition[4];
  return r;
}

namespace {

CMatrix random_complex(Index rows, Index cols, CounterRng& rng) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = rng.next_normal();
      const double im = rng.next_normal();
      m(i, j) = {re, im};
    }
  return m;
}

// Kolda-Bader mode-d unfolding of a column-major complex order-3 array.
CMatrix complex_unfold(const std::vector<Cd>& data, const std::array<Index, 3>& dims,
                       int mode) {
  const Index n1 = dims[0], n2 = dims[1], n3 = dims[2];
  CMatrix m;
  if (mode == 0)
    m.resize(n1, n2 * n3);
  else if (mode == 1)
    m.resize(n2, n1 * n3);
  else
    m.resize(n3, n1 * n2);
  for (Index k = 0; k < n3; ++k)
    for (Index j = 0; j < n2; ++j)
      for (Index i = 0; i < n1; ++i) {
        const Cd v = data[static_cast<std::size_t>(i + n1 * (j + n2 * k))];
        if (mode == 0)
          m(i, j + k * n2) = v;
        else if (mode == 1)
          m(j, i + k * n1) = v;
        else
          m(k, i + j * n1) = v;
      }
  return m;
}

// One column-matched complex-scalar alignment; returns squared relative error.
double complex_column_nmse(const CMatrix& estimate, const CMatrix& truth,
                           std::vector<Index>* match_out) {
  const Index nf = truth.cols();
  RMatrix cost(nf, nf);
  for (Index f = 0; f < nf; ++f)
    for (Index g = 0; g < nf; ++g) {
      const double den = truth.col(f).norm() * estimate.col(g).norm();
      cost(f, g) = den > 0.0 ? -std::abs(estimate.col(g).dot(truth.col(f))) / den : 0.0;
    }
  const std::vector<Index> match = hungarian(cost);
  double err = 0.0;
  for (Index f = 0; f < nf; ++f) {
    const Index g = match[static_cast<std::size_t>(f)];
    const double den = estimate.col(g).squaredNorm();
    const Cd s = den > 0.0 ? estimate.col(g).dot(truth.col(f)) / den : Cd{0.0, 0.0};
    err += (truth.col(f) - estimate.col(g) * s).squaredNorm();
  }
  if (match_out) *match_out = match;
  return err / truth.squaredNorm();
}

// Aligned NMSE of a quaternion factor given the component permutation,
// with a one-sided quaternion scalar per column (right for A, left for C).
double quaternion_column_nmse(const QMatrix& estimate, const QMatrix& truth,
                              const std::vector<Index>& match, bool right_scalar) {
  double err = 0.0, ref = 0.0;
  for (Index f = 0; f < truth.cols(); ++f) {
    const Index g = match[static_cast<std::size_t>(f)];
    Quaternion s{};
    const double den = col_norm_sq(estimate, g);
    for (Index i = 0; i < truth.rows(); ++i) {
      if (right_scalar)
        s += conj(estimate(i, g)) * truth(i, f);
      else
        s += truth(i, f) * conj(estimate(i, g));
    }
    if (den > 0.0) s = s * (1.0 / den);
    for (Index i = 0; i < truth.rows(); ++i) {
      const Quaternion fitted = right_scalar ? estimate(i, g) * s : s * estimate(i, g);
      err += abs_sq(truth(i, f) - fitted);
      ref += abs_sq(truth(i, f));
    }
  }
  return err / ref;
}

}  // namespace

EmpiricalBReport empirical_b_uniqueness_check(const CpdFactors& f, int starts,
                                              std::uint64_t seed, int max_iters,
                                              double rel_tol) {
  const Index nf = f.a.cols();
  const ConfacModel truth = confac_from_cpd(f);
  if (numerical_rank(truth.u) != 2 * nf || numerical_rank(truth.w) != 2 * nf ||
      numerical_rank(truth.b.cast<Cd>()) != nf)
    throw PreconditionError(
        "empirical_b_uniqueness_check: B, U and W must have full column rank");

  const QTensor t = cpd_reconstruct(f);
  const CdParts parts = cayley_dickson_parts(t);
  const CMatrix x1 = complex_unfold(parts.t1, parts.dims, 0);
  const CMatrix x2 = complex_unfold(parts.t1, parts.dims, 1);
  const CMatrix x3 = complex_unfold(parts.t1, parts.dims, 2);
  const double norm_t1 = x1.norm();
  if (norm_t1 == 0.0)
    throw PreconditionError("empirical_b_uniqueness_check: T1 vanishes");
  const Index n1 = parts.dims[0], n2 = parts.dims[1], n3 = parts.dims[2];

  EmpiricalBReport report;
  constexpr double recovered_tol = 1e-6;
  constexpr double cost_floor = 100.0 * std::numeric_limits<double>::epsilon();
  report.b_recovered_all = true;
  for (int s = 0; s < starts; ++s) {
    CounterRng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    CMatrix u = random_complex(n1, 2 * nf, rng);
    CMatrix bc = random_complex(n2, nf, rng);
    CMatrix w = random_complex(n3, 2 * nf, rng);
    double prev_cost = std::numeric_limits<double>::infinity();
    double cost = prev_cost;
    for (int it = 0; it < max_iters; ++it) {
      const CMatrix q = bc * truth.phi.cast<Cd>();
      const CMatrix r = w.conjugate();
      u = x1 * pinv_complex(truth.psi.cast<Cd>() *
                            khatri_rao(r, q).transpose());
      const CMatrix p2 = u * truth.psi.cast<Cd>();
      bc = x2 * pinv_complex(truth.phi.cast<Cd>() *
                             khatri_rao(r, p2).transpose());
      const CMatrix q2 = bc * truth.phi.cast<Cd>();
      w = (x3 * pinv_complex(khatri_rao(q2, p2).transpose())).conjugate();
      cost = (x1 - p2 * khatri_rao(w.conjugate(), q2).transpose()).norm() / norm_t1;
      const double dev = std::abs(cost - prev_cost) /
                         std::max(prev_cost, std::numeric_limits<double>::min());
      prev_cost = cost;
      if (dev < rel_tol || cost < cost_floor) break;
    }
    report.fit_cost.push_back(cost);
    std::vector<Index> match;
    const double bn = complex_column_nmse(bc, truth.b.cast<Cd>(), &match);
    report.b_nmse.push_back(bn);
    if (!(bn < recovered_tol)) report.b_recovered_all = false;
    // Read A and C candidates back from the CONFAC blocks. The T1 model is
    // blind to the pairing ambiguity inside U and W, so large values here
    // are expected; the component match reuses the B assignment.
    report.a_nmse.push_back(
        quaternion_column_nmse(confac_factor_a(u), f.a, match, /*right_scalar=*/true));
    report.c_nmse.push_back(
        quaternion_column_nmse(confac_factor_c(w), f.c, match, /*right_scalar=*/false));
  }
  return report;
}

void save_qf1(const CpdFactors& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("QFB1", 4);
  detail::write_u64(os, static_cast<std::uint64_t>(f.a.rows()));
  detail::write_u64(os, static_cast<std::uint64_t>(f.b.rows()));
  detail::write_u64(os, static_cast<std::uint64_t>(f.c.rows()));
  detail::write_u64(os, static_cast<std::uint64_t>(f.a.cols()));
  auto write_qplanes = [&](const QMatrix& m) {
    for (int c = 0; c < 4; ++c) {
      const RMatrix p = m.plane(c);
      detail::write_doubles(os, p.data(), static_cast<std::size_t>(p.size()));
    }
  };
  write_qplanes(f.a);
  detail::write_doubles(os, f.b.data(), static_cast<std::size_t>(f.b.size()));
  write_qplanes(f.c);
  if (!os) throw IoError("write failed: " + path);
}

CpdFactors load_qf1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "QFB1") throw IoError("not a QF1 bundle: " + path);
  const Index n1 = static_cast<Index>(detail::read_u64(is));
  const Index n2 = static_cast<Index>(detail::read_u64(is));
  const Index n3 = static_cast<Index>(detail::read_u64(is));
  const Index nf = static_cast<Index>(detail::read_u64(is));
  if (!is || n1 < 1 || n2 < 1 || n3 < 1 || nf < 1)
    throw IoError("QF1 header corrupt: " + path);
  auto read_qplanes = [&](Index rows) {
    QMatrix m(rows, nf);
    for (int c = 0; c < 4; ++c) {
      RMatrix p(rows, nf);
      detail::read_doubles(is, p.data(), static_cast<std::size_t>(p.size()));
      m.set_plane(c, p);
    }
    return m;
  };
  QMatrix a = read_qplanes(n1);
  RMatrix b(n2, nf);
  detail::read_doubles(is, b.data(), static_cast<std::size_t>(b.size()));
  QMatrix c = read_qplanes(n3);
  if (!is) throw IoError("QF1 payload truncated: " + path);
  return CpdFactors(std::move(a), std::move(b), std::move(c));
}

}  // namespace qten
