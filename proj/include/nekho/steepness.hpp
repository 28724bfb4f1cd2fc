// SPDX-License-Identifier: Apache-2.0
//
// Steepness checks: Arnold determinant, two-degree-of-freedom coefficient
// tests, Birkhoff coefficients and sampled versions of the steepness and
// isolated-critical-point criteria.

#pragma once

#include "nekho/core.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nekho {

/// det [[Hess h, grad h^T], [grad h, 0]] in d = 2.
double arnold_determinant(const FrequencyModel& fm, const Vec& a);

/// Arnold determinant of h = α0 y^𝚍 + α1 y^{𝚍-1} x + α2/2 y^{𝚍-2} x² + ... at (0, y).
double arnold_determinant_expansion(double alpha0, double alpha1, double alpha2, double degree,
                                    double y);

/// α0 ≠ 0 and 𝚍α0α2 − (𝚍−1)α1² ≠ 0, zero meaning |x| < tol * scale.
bool check_steep_fin(double alpha0, double alpha1, double alpha2, double degree,
                     double tol = 1e-9);

/// First two coefficients (c1, c2) of the Birkhoff expansion; A > 0 required.
std::pair<double, double> birkhoff_coefficients(double A, double B, double C);

/// β0(−5β3² + 3β2β4)/(24β2²) − β2; NaN when β2 = 0.
double rotation_condition_value(double beta0, double beta2, double beta3, double beta4);
bool check_rotation_condition(double beta0, double beta2, double beta3, double beta4,
                              double tol = 1e-9);

struct SteepnessWitness {
  Vec a;
  std::vector<Vec> subspace;  // orthonormal basis of M
  double xi = 0.0;
  double value = 0.0;  // max_η min_u |Π_M ω(a+ηu)|
  double bound = 0.0;
};

struct SteepnessReport {
  std::string method;
  std::uint64_t seed = 0;
  std::size_t points = 0;
  std::size_t subspaces = 0;
  bool pass = true;
  /// Per dimension s = 1..d-1: smallest observed value / (r^{M-α_s} ξ^{α_s}),
  /// i.e. the largest B_s the samples support.
  std::vector<double> fitted_B;
  double min_margin = 0.0;  // min over samples of value / bound
  double min_omega = 0.0;   // smallest |ω| seen on sampled points
  std::vector<SteepnessWitness> witnesses;  // failures, worst first (capped)
};

struct SteepnessOptions {
  double r = 1.0;       // annulus scale: |a| in [r/2, 2r]
  double rbar = 0.25;   // ξ ranges over (0, r * rbar]
  int xi_points = 16;
  int eta_points = 64;
  int directions = 24;  // unit vectors sampled in M when dim M >= 2
  int samples = 1000;
  std::size_t max_witnesses = 16;
};

/// Sampled steepness test with indices α_s and coefficients B_s (s = 1..d-1).
SteepnessReport sample_steepness(const FrequencyModel& fm, const Cone& cone,
                                 const std::vector<double>& alphas, const std::vector<double>& B,
                                 const SteepnessOptions& opt, std::uint64_t seed);

struct NiedermanOptions {
  double r = 1.0;
  int samples = 200;
  int starts = 100;
  double half_width = 0.2;  // line parameter t ∈ [-hw r, hw r]
  double tol = 1e-6;
};

/// Restricts h0 to random lines a + t u (u ⟂ ω(a)) and flags critical
/// points that are not isolated.
SteepnessReport niederman_check(const FrequencyModel& fm, const Cone& cone,
                                const NiedermanOptions& opt, std::uint64_t seed);

/// Random point with |a| in [r/2, 2r] strictly inside the cone.
Vec sample_annulus(const Cone& cone, int dim, double r, std::uint64_t seed, std::uint64_t index);

}  // namespace nekho
