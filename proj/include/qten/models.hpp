#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "qten/qmatrix.hpp"
#include "qten/qtensor.hpp"
#include "qten/rank.hpp"

namespace qten {

/// Tucker model of an order-3 quaternion tensor with a real middle factor:
/// T = S x_0 A x_1 B x_2 C, so entrywise
/// T[i,j,k] = sum_{f1,f2,f3} A[i,f1] * S[f1,f2,f3] * C[k,f3] * B[j,f2].
struct TuckerModel {
  QTensor core;  ///< F1 x F2 x F3
  QMatrix a;     ///< N1 x F1, quaternion, acts from the left
  RMatrix b;     ///< N2 x F2, real
  QMatrix c;     ///< N3 x F3, quaternion, acts from the right
};

QTensor tucker_reconstruct(const TuckerModel& m);

/// Rank-F canonical polyadic factors with a real middle factor:
/// T[i,j,k] = sum_f A[i,f] * C[k,f] * B[j,f].
/// Shapes must be consistent and no factor may carry an all-zero column
/// (DomainError), since such a component is degenerate.
struct CpdFactors {
  QMatrix a;  ///< N1 x F
  RMatrix b;  ///< N2 x F
  QMatrix c;  ///< N3 x F

  CpdFactors() = default;
  CpdFactors(QMatrix a_, RMatrix b_, QMatrix c_);
};

QTensor cpd_reconstruct(const CpdFactors& f);

/// Mode-d unfoldings of the CPD model in product form:
///   unfold 0:  A *> (C (.) B)^T          (direct Khatri-Rao)
///   unfold 1:  B  * (C (.)< A)^T         (reverse Khatri-Rao)
///   unfold 2:  C *< (B (.) A)^T
QMatrix cpd_unfolding(const CpdFactors& f, Index mode);

/// Model-form slices, matching slice(cpd_reconstruct(f), kind, index):
///   horizontal i:  B (D_A(i) *> C^T)
///   lateral j:     (A D_B(j)) *> C^T
///   frontal k:     (A *> D_C(k)) B^T
/// where D_X(r) is the diagonal matrix built from row r of X.
QMatrix cpd_slice(const CpdFactors& f, SliceKind kind, Index index);

/// Per-component scaling triple (alpha_f, beta_f, gamma_f): quaternion,
/// real, quaternion. Together with a permutation it maps factors to
///   A' = A *> (La P),  B' = B Lb P,  C' = C *< (Lc P)
/// and leaves the reconstruction invariant exactly when
/// alpha_f * gamma_f * beta_f = 1 for every component (admissibility).
struct ScalingTriple {
  std::vector<Quaternion> alpha;
  std::vector<double> beta;
  std::vector<Quaternion> gamma;
};

/// Largest deviation |alpha_f * gamma_f * beta_f - 1| over the components.
double scaling_admissibility_residual(const ScalingTriple& s);

/// Applies an admissible scaling and permutation; perm[g] names the source
/// component placed at position g. Throws InvalidScalingError if the
/// admissibility residual exceeds tol, ShapeError on inconsistent sizes.
CpdFactors apply_scaling(const CpdFactors& f, const ScalingTriple& s,
                         const std::vector<Index>& perm, double tol = 1e-10);

/// Estimate/truth factor alignment: matches components with a Hungarian
/// assignment on |correlation| between the real middle-factor columns, then
/// removes the scaling ambiguity per matched column by least squares
/// (right quaternion scalar on A, real scalar on B, left quaternion scalar
/// on C). nmse[.] is the squared relative Frobenius error of the aligned
/// estimate against the truth factor; rel_rmse is its square root.
struct AlignmentResult {
  CpdFactors aligned;
  std::vector<Index> permutation;  ///< truth component f matched estimate column permutation[f]
  std::array<double, 3> nmse{};      ///< order A, B, C
  std::array<double, 3> rel_rmse{};  ///< order A, B, C
};

AlignmentResult align_factors(const CpdFactors& estimate, const CpdFactors& truth);

/// Complex adjoint tensor of an order-3 quaternion tensor: lateral slice j
/// of the result is adjoint(slice(T, Lateral, j), Direct), giving a
/// 2N1 x N2 x 2N3 complex tensor stored as its lateral slices.
std::vector<CMatrix> adjoint_tensor(const QTensor& t);

/// Coupled pair of complex CONFAC models equivalent to a Q-CPD. With
/// A = A1 + A2 j and C = C1 + C2 j:
///   U = [A1 A2], W = [C2 conj(C1)]  (N1 x 2F, N3 x 2F)
///   Psi = [[0 I],[-I 0]], Phi = [I I], Omega = -Psi
/// The Cayley-Dickson parts of T decompose as T1 = [[U Psi, B Phi, conj(W)]]
/// and T2 = [[U, B Phi, W]]. Stacking both parts gives, per mode, one matrix
/// equation whose factor blocks are the columnwise-adjoint stacks:
///   T^A = U  [chi_<(C) (.) B Phi]^T   (N1 x 2 N3 N2, blocks [T1 | T2])
///   T^B = B Phi [chi_>(A) (.) W ]^T   (N2 x 2 N1 N3, blocks [T2 | conj T1])
///   T^C = W  [chi_>(A) (.) B Phi]^T   (N3 x 2 N1 N2, blocks [T2 | conj T1])
/// where chi_>(A) = [[U],[conj(U) Psi]] and chi_<(C) = [[conj(W) Omega],[W]].
struct ConfacModel {
  CMatrix u;       ///< N1 x 2F
  CMatrix w;       ///< N3 x 2F
  RMatrix b;       ///< N2 x F
  RMatrix psi;     ///< 2F x 2F
  RMatrix phi;     ///< F x 2F
  RMatrix omega;   ///< 2F x 2F
};

ConfacModel confac_from_cpd(const CpdFactors& f);

/// Recover (A, C) from the CONFAC blocks: A = U1 + U2 j, C = conj(W2) + W1 j.
QMatrix confac_factor_a(const CMatrix& u);
QMatrix confac_factor_c(const CMatrix& w);

/// Cayley-Dickson parts of an order-3 tensor, column-major complex planes.
struct CdParts {
  std::array<Index, 3> dims{};
  std::vector<std::complex<double>> t1, t2;
};

CdParts cayley_dickson_parts(const QTensor& t);

/// The three stacked CONFAC matrices built from the model factors, plus the
/// largest entrywise deviation from the same stacks assembled out of the
/// tensor data (T1, T2). Block column layouts (zero-based):
///   T^A columns: part * N3 N2 + i3 * N2 + i2   (parts T1, T2)
///   T^B columns: part * N1 N3 + i1 * N3 + i3   (parts T2, conj T1)
///   T^C columns: part * N1 N2 + i1 * N2 + i2   (parts T2, conj T1)
struct ConfacUnfoldings {
  CMatrix ta, tb, tc;
  double residual_a = 0.0, residual_b = 0.0, residual_c = 0.0;
};

ConfacUnfoldings confac_unfoldings(const ConfacModel& m, const CdParts& parts);

/// Sufficient-condition certificate for essential uniqueness of a Q-CPD.
/// The decomposition is certified when any of the five conditions holds:
///   1. rrank A = F, lrank C = F, B has no proportional columns
///   2. krank B = F       and  rkrank A + lkrank C >= F + 2
///   3. rkrank A = F      and  krank B + lkrank C >= F + 2
///   4. lkrank C = F      and  rkrank A + krank B >= F + 2
///   5. N1 N3 >= F        and  rkrank A + krank B + lkrank C >= 2F + 2
struct UniquenessReport {
  Index f = 0;
  Index rrank_a = 0, lrank_c = 0;
  Index krank_b = 0, rkrank_a = 0, lkrank_c = 0;
  bool b_no_proportional_columns = false;
  std::array<bool, 5> condition{};
  bool certified = false;
};

struct CertifyOptions {
  double tol = 0.0;                                  ///< rank tolerance (0 = default policy)
  KrankMethod krank = KrankMethod::BruteForce;       ///< Kruskal-rank evaluation
  Index guard = kKruskalColumnGuard;
  double proportional_angle = 1e-8;                  ///< radians; smaller = proportional
};

UniquenessReport certify_uniqueness(const CpdFactors& f, const CertifyOptions& opts = {});

/// Empirical check that the real middle factor is already determined by the
/// first Cayley-Dickson part alone: fits the T1 CONFAC model (factors
/// U Psi, B Phi, conj W with B kept complex during the fit) by alternating
/// least squares from `starts` random initializations and reports, per
/// start, the aligned NMSE of the recovered B against the truth, plus the
/// NMSE of the A and C candidates read back from U and W (those are NOT
/// expected to be recoverable from T1 alone). Requires B, U and W of the
/// truth to have full column rank (PreconditionError otherwise).
struct EmpiricalBReport {
  std::vector<double> b_nmse;          ///< per start, after permutation + complex scaling
  std::vector<double> a_nmse, c_nmse;  ///< per start, quaternion alignment of U/W read-back
  std::vector<double> fit_cost;        ///< per start, final relative fit error on T1
  bool b_recovered_all = false;        ///< every start reached b_nmse < 1e-6
};

EmpiricalBReport empirical_b_uniqueness_check(const CpdFactors& f, int starts,
                                              std::uint64_t seed = 0,
                                              int max_iters = 1500,
                                              double rel_tol = 1e-10);

/// Binary factor bundle, format QF1: magic "QFB1", u64 N1 N2 N3 F, then the
/// four component planes of A (w, x, y, z), the single plane of B, and the
/// four planes of C. Planes are float64, column-major, little-endian.
void save_qf1(const CpdFactors& f, const std::string& path);
CpdFactors load_qf1(const std::string& path);

}  // namespace qten
