// SPDX-License-Identifier: Apache-2.0
//
// Schrödinger evolution on truncated lattices: block-exact propagation for
// normal-form generators, sparse integrators with a remainder, and the exact
// non-steep counterexample.

#pragma once

#include "nekho/normalform.hpp"
#include "nekho/partition.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nekho {

struct EvolutionRun {
  std::string method;
  std::vector<double> times;
  std::vector<double> s_values;
  std::vector<std::vector<double>> norms;  // norms[i][t] = |psi(t)|_{s_i}
  double max_l2_drift = 0.0;
  std::uint64_t config_hash = 0;
  Eigen::VectorXcd final_state;
};

struct RandomNormalFormSpec {
  std::uint64_t seed = 1;
  double tb = 0.0;         // order: envelope max(|a|,|b|)^tb
  double decay = 2.0;      // ⟨b − a⟩^{−decay}
  double amplitude = 1.0;
  std::vector<double> frequencies;  // quasi-periodic modulation; empty = static
};

/// Hermitian Z coupling interior-safe a ≠ b only when [a resonant with b−a] or
/// [b resonant with b−a]; diagonal left to H0.
LatticeOperator generate_normal_form(const RandomNormalFormSpec& spec, const ResonanceAnalysis& an);

/// Quasi-periodic scalar modulation 1 + Σ_j cos(ν_j t) / (2 n) of a normal form.
double modulation(const RandomNormalFormSpec& spec, double t);

/// Block id per lattice point from the E layer; unlabeled or multiply
/// labeled points become their own singleton blocks.
std::vector<std::size_t> block_ids(const BlockPartition& part);

/// Largest |X[b][a]| with a and b in different blocks.
double off_block_norm(const LatticeOperator& X, const std::vector<std::size_t>& blocks);

struct BlockExactOptions {
  std::size_t max_block = 4000;  // dense eigensolve cap
  double dt = 0.05;              // step for time-dependent modulation
};

/// Dense per-block eigendecomposition of H0 + f(t) Z; exact in space. With a
/// time-dependent f the midpoint exponential is applied block by block.
EvolutionRun evolve_block_exact(const Lattice& lat, const FrequencyModel& fm, const LatticeOperator& Z,
                                const std::vector<std::size_t>& blocks, const Eigen::VectorXcd& psi0,
                                const std::vector<double>& times, const std::vector<double>& s_values,
                                const BlockExactOptions& opt = {},
                                const std::function<double(double)>& f = nullptr);

enum class Integrator { Rk4, SplitStep };

struct RemainderOptions {
  Integrator integrator = Integrator::SplitStep;
  double dt = 0.01;
  double drift_tol = 1e-7;
  std::size_t max_block = 4000;
};

/// H = H0 + Z + R_op. rk4 on the full sparse generator or Strang splitting
/// with exact block half-steps for H0 + Z and a Taylor exponential of R_op.
EvolutionRun evolve_with_remainder(const Lattice& lat, const FrequencyModel& fm,
                                   const LatticeOperator& Z, const LatticeOperator& R_op,
                                   const std::vector<std::size_t>& blocks,
                                   const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                                   const std::vector<double>& s_values,
                                   const RemainderOptions& opt = {});

/// Random hermitian operator of order `order` on offsets |k| <= kmax:
/// entries amplitude · max(⟨a⟩,⟨b⟩)^order · uniform phase.
LatticeOperator random_remainder(const Lattice& lat, double order, double kmax, double amplitude,
                                 std::uint64_t seed);

/// Unit mass split evenly over the minimal-norm points of the `count`
/// largest E blocks with s >= 1 (falls back to the largest blocks overall).
Eigen::VectorXcd resonant_initial_data(const BlockPartition& part, std::size_t count);

struct PowerFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
/// Least squares of log y against log x.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------- counterexample

struct CounterexampleState {
  int n = 1;
  std::vector<int> m;                // mode (−m, n + m)
  Eigen::VectorXcd amplitudes;
  std::vector<IVec> points() const;
  std::vector<double> point_norms() const;
  double sobolev(double s) const;
};

/// Recommended truncation εt + 10 (εt)^{1/3} + 20.
int counterexample_truncation(double eps, double t);

/// Closed form: mode (−m, n+m) carries J_m(εt) e^{i(2mn+n²)t}, |m| <= K.
CounterexampleState counterexample_exact(double eps, int n, double t, int K);

struct CounterexampleRun {
  EvolutionRun run;
  std::vector<double> rel_l2_error;  // vs closed form at each output time
  std::vector<CounterexampleState> states;
};

/// rk4 on the Fourier chain of the equation with step dt.
CounterexampleRun counterexample_evolve(double eps, int n, const std::vector<double>& times, int K,
                                        double dt = 1e-3, const std::vector<double>& s_values = {0, 1, 2});

}  // namespace nekho
