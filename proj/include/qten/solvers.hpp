#pragma once

#include <array>
#include <cstdint>

#include "qten/models.hpp"

namespace qten {

enum class SolverInit {
  RandomNormal,  ///< i.i.d. standard normal per component, seeded
  Provided,      ///< use SolverConfig::init_factors
};

struct SolverConfig {
  int max_iters = 500;
  double rel_tol = 1e-8;        ///< on the relative deviation of the cost
  std::uint64_t seed = 0;
  SolverInit init = SolverInit::RandomNormal;
  CpdFactors init_factors;      ///< consulted only for SolverInit::Provided
};

/// cost[0] is the cost of the initialization; cost[i] the relative
/// reconstruction error ||T - [[A,B,C]]||_F / ||T||_F after sweep i.
/// A sweep converges when the relative deviation between consecutive costs
/// falls below rel_tol, or the cost itself reaches the roundoff floor.
struct SolverTrace {
  std::vector<double> cost;
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  /// C-ALS only: per-sweep relative Frobenius norm of the imaginary part of
  /// the complex middle-factor estimate before its projection onto the reals.
  std::vector<double> b_imag_residual;
};

struct SolveResult {
  CpdFactors factors;
  SolverTrace trace;
};

/// Draws rank-F starting factors for a tensor of the given dimensions.
/// RandomNormal fills A, then B, then C, each column by column (rows fastest),
/// quaternion entries component order (w, x, y, z), from a counter-based
/// generator keyed by cfg.seed; identical seeds give bit-identical factors.
CpdFactors initialize(const std::array<Index, 3>& dims, Index f, const SolverConfig& cfg);

/// Quaternion alternating least squares for the rank-F model
/// T[i,j,k] = sum_f A[i,f] C[k,f] B[j,f] (B real). Block order A, B, C; each
/// block update is an exact least-squares minimizer, so the traced cost never
/// increases. Deterministic for identical (T, F, cfg).
SolveResult qals(const QTensor& t, Index f, const SolverConfig& cfg);

/// Complex-domain solver for the same model: alternates the pseudo-inverse
/// updates of the two coupled CONFAC models of the Cayley-Dickson parts,
/// block order B, C (via W), A (via U). The middle factor is re-projected
/// onto the reals each sweep; the discarded imaginary mass is traced. Costs
/// are tracked in the quaternion domain, identically to qals.
SolveResult cals(const QTensor& t, Index f, const SolverConfig& cfg);

/// Relative reconstruction error of a factor set against a tensor.
double cpd_relative_cost(const QTensor& t, const CpdFactors& f);

namespace solver_detail {

/// Single exact block updates, exposed so tests can measure each alone.
QMatrix update_a(const QMatrix& t_unfold0, const RMatrix& b, const QMatrix& c);
RMatrix update_b(const QMatrix& t_unfold1, const QMatrix& a, const QMatrix& c);
QMatrix update_c(const QMatrix& t_unfold2, const QMatrix& a, const RMatrix& b);

}  // namespace solver_detail

}  // namespace qten
