// SPDX-License-Identifier: Apache-2.0
//
// Matrix-level normal form: Fourier coefficients of lattice operators,
// cutoff splitting and the cohomological equation with cutoffed denominators.

#pragma once

#include "nekho/core.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

namespace nekho {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Sparse operator F[b][a] on a truncated lattice (row b, column a).
struct LatticeOperator {
  const Lattice* lattice = nullptr;
  SpMat m;
  bool hermitian = false;

  static LatticeOperator zero(const Lattice& lat);
  static LatticeOperator from_triplets(const Lattice& lat,
                                       const std::vector<Eigen::Triplet<cplx>>& t,
                                       bool hermitian = false);
  std::size_t size() const { return static_cast<std::size_t>(m.rows()); }
  cplx at(std::size_t b, std::size_t a) const { return m.coeff(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)); }
  /// max |F[b][a] − conj F[a][b]|
  double hermiticity_defect() const;
  double max_abs() const;
  LatticeOperator adjoint() const;
  /// (F + F*)/2
  LatticeOperator symmetrized() const;
  /// Integer offset b − a of an entry.
  IVec offset(std::size_t b, std::size_t a) const;
};

LatticeOperator operator+(const LatticeOperator& x, const LatticeOperator& y);
LatticeOperator operator-(const LatticeOperator& x, const LatticeOperator& y);

/// C² bump: 1 on [−1/2, 1/2], quintic transition, 0 for |t| >= 1.
double chi(double t);

/// F̂_k[b][a] = F[b][a] when b − a = k, zero otherwise.
LatticeOperator fourier_coefficient(const LatticeOperator& F, const IVec& k);

struct CutoffValues {
  double chi_tilde = 0.0;       // χ(|k| / |a|^μ)
  double chi_k = 0.0;           // χ(ω·k / (|a|^δ |k|))
  double chi_R = 0.0;           // χ(|a| / R)
  double chi_T = 0.0;           // (1 − χ_R) χ_k
  double d_T = 0.0;             // (1 − χ_R)(1 − χ_k) / (ω·k)
  double one_minus_both = 0.0;  // (1 − χ_R)(1 − χ_k)
};

/// Cutoffs at a; k = 0 uses χ_0 = 1 and χ̃_0 = 1.
CutoffValues cutoff_values(const Vec& a, const IVec& k, const NekhoroshevParams& p,
                           const FrequencyModel& fm);

struct OperatorSplit {
  LatticeOperator res, nr, smooth;
  double identity_defect = 0.0;  // max |F − (res + nr + smooth)|
};

/// Resonant / nonresonant / smoothing parts; multipliers act on the row index.
OperatorSplit split_operator(const LatticeOperator& F, const NekhoroshevParams& p,
                             const FrequencyModel& fm);

struct CohomologicalSolution {
  LatticeOperator G, Z, smooth, nr, residual;
};

/// G_0 = −i Σ_{k≠0} d^T_k(A) F̂_k, G = (G_0 + G_0*)/2, Z = F_res and
/// residual = −i[H0, G] + F − Z − F_S with the exact lattice commutator.
CohomologicalSolution solve_cohomological(const LatticeOperator& F, const NekhoroshevParams& p,
                                          const FrequencyModel& fm);

/// −i[H0, X] with H0 = diag h0(a).
LatticeOperator h0_commutator(const LatticeOperator& X, const FrequencyModel& fm);

struct OrderFit {
  double m = 0.0;
  double r2 = 0.0;
  double intercept = 0.0;
  std::vector<double> bin_radius, bin_value;
};

struct OrderFitOptions {
  double rmin = 1.0;
  double rmax = -1.0;  // < 0: lattice radius
  int bins = 12;
  int min_bins = 10;
};

/// Least-squares slope of log(max |entry| per radial bin of the row) vs log |a|.
OrderFit order_fit(const LatticeOperator& F, const OrderFitOptions& opt = {});

/// Entries (b, a), b ≠ a, whose offset k = b − a is not resonant at a or at b
/// under the cutoff-support predicate |a| > R/2, |k| < |a|^μ, |ω·k| < |a|^δ |k|.
std::size_t normal_form_mask_violations(const LatticeOperator& F, const NekhoroshevParams& p,
                                        const FrequencyModel& fm);

/// Hermitian test operator with entries exp(−|k|²/2) (1 + phase) on offsets
/// |k| <= kmax; order zero.
LatticeOperator smooth_test_operator(const Lattice& lat, double kmax, double order = 0.0);

/// Random hermitian operator with unit-scale entries on offsets |k| <= kmax.
LatticeOperator random_hermitian(const Lattice& lat, double kmax, std::uint64_t seed);

}  // namespace nekho
