// SPDX-License-Identifier: Apache-2.0
//
// Classical action variables for the planar anharmonic oscillator and for
// rotation-invariant surfaces, their inversion E = h0(a1, a2), and adapters
// producing FrequencyModels.

#pragma once

#include "nekho/chebyshev.hpp"
#include "nekho/core.hpp"

#include <array>
#include <functional>
#include <string>

namespace nekho {

// ---------------------------------------------------------------- anharmonic

/// V*_L(r) = L²/(2r²) + r^{2ℓ}/(2ℓ)
double anharmonic_effective_potential(double r, double L, int ell);
/// Largest admissible |L| at energy E: (2ℓE/(ℓ+1))^{(ℓ+1)/(2ℓ)}.
double anharmonic_L_max(double E, int ell);
/// Turning points 0 < r_m < r_M of E = V*_L(r).
std::pair<double, double> anharmonic_turning_points(double E, double L, int ell);

/// (√2/π) ∫ √(E − V*_L) dr over [r_m, r_M]; `panels` Gauss–Legendre panels.
double anharmonic_radial_action(double E, double L, int ell, int panels = 4);
/// a_r for L > 0, a_r − L for L < 0.
double anharmonic_a1(double E, double L, int ell);
/// Inverse of (E, L) -> (a1(E, L), L).
double anharmonic_h0_from_actions(double a1, double a2, int ell);

// ---------------------------------------------------------------- rotation surfaces

struct RotationSurface {
  std::string name;
  std::function<double(double)> r;  // profile on (0, length)
  double length = 0.0;

  static RotationSurface sphere();
  /// r(θ) = sin θ (1 + eps sin²θ)
  static RotationSurface ellipsoid_like(double eps = 0.1);
  /// r(θ) = sin θ + c sin 3θ; several critical points for c large enough.
  static RotationSurface bumpy(double c = 0.5);
};

enum class AzimuthConvention {
  FactorTwo,  // √(2E − p²/r²), default
  Literal,    // √(E − p²/r²)
};

/// Location of the unique maximum of r; throws if r' changes sign more than once.
double rotation_theta0(const RotationSurface& s);

double rotation_a1(double E, double p_phi, const RotationSurface& s,
                   AzimuthConvention conv = AzimuthConvention::FactorTwo, int panels = 4);
double rotation_h0_from_actions(double a1, double a2, const RotationSurface& s,
                                AzimuthConvention conv = AzimuthConvention::FactorTwo);

/// (β0, β2, β3, β4) of 1/(2r²) at θ0, normalized as β2 x²/2 + β3 x³/3! + β4 x⁴/4!.
std::array<double, 4> taylor_betas(const RotationSurface& s, int order = 4);

// ---------------------------------------------------------------- adapters

struct ActionModel {
  FrequencyModel model;
  /// Max |h0 interpolant − direct inversion| / h0 at check angles, unit radius.
  double interpolation_error = 0.0;
  Chebyshev profile;  // g(θ) with h0 = |a|^𝚍 g(θ)
};

/// h0 = |a|^{2ℓ/(ℓ+1)} g(θ) on the anharmonic cone.
ActionModel anharmonic_frequency_model(int ell, int nodes = 48);
/// h0 = |a|² g(θ) on the cone a1 >= |a2|; the sphere takes the closed form a1²/2.
ActionModel rotation_frequency_model(const RotationSurface& s, int nodes = 48);

/// Gauss–Legendre integral over [lo, hi] split into equal panels.
double gauss_legendre(const std::function<double(double)>& f, double lo, double hi, int panels);

}  // namespace nekho
