#include "qten/rank.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>

namespace qten {

namespace {

double default_tol(Index rows, Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon() * sigma_max;
}

Index count_above(const Eigen::VectorXd& sv, double tol) {
  Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  return r;
}

Index quaternion_rank(const QMatrix& a, AdjointKind kind, double tol, const char* name) {
  const CMatrix x = adjoint(a, kind);
  Eigen::JacobiSVD<CMatrix> svd(x);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double t = tol > 0.0 ? tol : default_tol(x.rows(), x.cols(), smax);
  const Index rc = count_above(sv, t);
  if (rc % 2 != 0) {
    std::vector<double> spectrum(sv.data(), sv.data() + sv.size());
    throw IllConditionedError(std::string(name) +
                                  ": tolerance splits a singular-value pair "
                                  "(complex rank " +
                                  std::to_string(rc) + ")",
                              std::move(spectrum));
  }
  return rc / 2;
}

template <typename RankOfSubset>
Index kruskal_generic(Index rows, Index cols, double /*tol*/, KrankMethod method,
                      Index guard, RankOfSubset rank_of) {
  if (method == KrankMethod::AssumeGeneric) return std::min(rows, cols);
  if (cols > guard)
    throw ResourceError("kruskal rank: " + std::to_string(cols) +
                        " columns exceeds the enumeration guard of " +
                        std::to_string(guard));
  const Index rmax = std::min(rows, cols);
  for (Index r = 1; r <= rmax; ++r) {
    // Enumerate all r-subsets of [0, cols) in lexicographic order.
    std::vector<Index> idx(static_cast<std::size_t>(r));
    for (Index i = 0; i < r; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      if (rank_of(idx) < r) return r - 1;
      Index i = r - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == cols - r + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (Index j = i + 1; j < r; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return rmax;
}

QMatrix select_columns(const QMatrix& a, const std::vector<Index>& idx) {
  QMatrix s(a.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    for (Index i = 0; i < a.rows(); ++i) s(i, static_cast<Index>(j)) = a(i, idx[j]);
  return s;
}

}  // namespace

Index numerical_rank(const CMatrix& m, double tol) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double t = tol > 0.0 ? tol : default_tol(m.rows(), m.cols(), smax);
  return count_above(sv, t);
}

std::vector<double> singular_values(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const Eigen::VectorXd sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

Index rank_right(const QMatrix& a, double tol) {
  return quaternion_rank(a, AdjointKind::Direct, tol, "rank_right");
}

Index rank_left(const QMatrix& a, double tol) {
  return quaternion_rank(a, AdjointKind::Reverse, tol, "rank_left");
}

Index kruskal_rank_right(const QMatrix& a, double tol, KrankMethod method, Index guard) {
  return kruskal_generic(a.rows(), a.cols(), tol, method, guard,
                         [&](const std::vector<Index>& idx) {
                           return rank_right(select_columns(a, idx), tol);
                         });
}

Index kruskal_rank_left(const QMatrix& a, double tol, KrankMethod method, Index guard) {
  return kruskal_generic(a.rows(), a.cols(), tol, method, guard,
                         [&](const std::vector<Index>& idx) {
                           return rank_left(select_columns(a, idx), tol);
                         });
}

Index kruskal_rank_real(const RMatrix& a, double tol, KrankMethod method, Index guard) {
  return kruskal_generic(a.rows(), a.cols(), tol, method, guard,
                         [&](const std::vector<Index>& idx) {
                           CMatrix s(a.rows(), static_cast<Index>(idx.size()));
                           for (std::size_t j = 0; j < idx.size(); ++j)
                             s.col(static_cast<Index>(j)) =
                                 a.col(idx[j]).cast<std::complex<double>>();
                           return numerical_rank(s, tol);
                         });
}

}  // namespace qten
