// SPDX-License-Identifier: Apache-2.0
//
// Randomized inequality suites shared by the unit tests and the acceptance
// binary. Each returns the number of instances, the number of violations and
// the worst observed ratio lhs / rhs.

#pragma once

#include "nekho/core.hpp"
#include "nekho/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace nekho::props {

struct SuiteResult {
  int instances = 0;
  int violations = 0;
  double max_ratio = 0.0;
};

// Random orthonormal basis of span(cols).
inline Mat orthonormal(const Mat& cols) {
  Eigen::HouseholderQR<Mat> qr(cols);
  return (qr.householderQ() * Mat::Identity(cols.rows(), cols.cols()));
}

/// |w| <= s N^{s-1} α / Vol(u_1..u_s) for w in span(u), |u_j| <= N,
/// |<w,u_j>| <= α. Vectors are drawn both generic and nearly degenerate.
inline SuiteResult giorgilli_suite(int count, std::uint64_t seed) {
  SuiteResult r;
  for (int n = 0; n < count; ++n) {
    auto gen = stream(seed, "giorgilli", static_cast<std::uint64_t>(n));
    std::uniform_int_distribution<int> dim(1, 5);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int d = std::max(dim(gen), 1);
    std::uniform_int_distribution<int> sdist(1, d);
    const int s = sdist(gen);
    Mat U(d, s);
    for (Eigen::Index i = 0; i < U.size(); ++i) U.data()[i] = g(gen);
    if (s >= 2 && u01(gen) < 0.3) U.col(s - 1) = U.col(0) + 1e-3 * U.col(s - 1);  // near-degenerate
    const double N = U.colwise().norm().maxCoeff() * (1.0 + u01(gen));
    Vec c(s);
    for (int j = 0; j < s; ++j) c[j] = g(gen);
    const Vec w = U * c;
    const double alpha = (U.transpose() * w).cwiseAbs().maxCoeff();
    const double vol = std::sqrt(std::max(0.0, (U.transpose() * U).determinant()));
    if (!(vol > 1e-12)) continue;
    ++r.instances;
    const double rhs = s * std::pow(N, s - 1) * alpha / vol;
    const double ratio = w.norm() / rhs;
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (ratio > 1.0 + 1e-9) ++r.violations;
  }
  return r;
}

/// ‖Π_{M'} − Π_M‖_op <= 9 ε / ‖ω_*‖ with M' = Π_{ω_*^⊥} M whenever
/// ‖Π_M ω_*‖ <= ε <= ‖ω_*‖/2.
inline SuiteResult projector_suite(int count, std::uint64_t seed) {
  SuiteResult r;
  int attempts = 0;
  while (r.instances < count && attempts < 50 * count) {
    auto gen = stream(seed, "projector", static_cast<std::uint64_t>(attempts++));
    std::uniform_int_distribution<int> dim(2, 6);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int d = dim(gen);
    std::uniform_int_distribution<int> mdist(1, d - 1);
    const int m = mdist(gen);
    Vec w(d);
    for (int i = 0; i < d; ++i) w[i] = g(gen);
    w *= std::exp(3.0 * g(gen));
    const Vec wn = w.normalized();
    // M spanned by vectors mostly orthogonal to ω_* with a tilt toward it.
    Mat B(d, m);
    const double tilt = std::pow(10.0, -3.0 * u01(gen));
    for (int j = 0; j < m; ++j) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v[i] = g(gen);
      v -= v.dot(wn) * wn;
      v += tilt * g(gen) * v.norm() * wn;
      B.col(j) = v;
    }
    const Mat Q = orthonormal(B);
    const Mat PM = Q * Q.transpose();
    const double eps = (PM * w).norm() * (1.0 + 0.1 * u01(gen));
    if (!(eps <= 0.5 * w.norm())) continue;
    Mat B2 = B;
    for (int j = 0; j < m; ++j) B2.col(j) -= B2.col(j).dot(wn) * wn;
    const Mat Q2 = orthonormal(B2);
    const Mat PM2 = Q2 * Q2.transpose();
    const double lhs = Eigen::SelfAdjointEigenSolver<Mat>(PM2 - PM).eigenvalues().cwiseAbs().maxCoeff();
    const double rhs = 9.0 * eps / w.norm();
    ++r.instances;
    const double ratio = rhs > 0.0 ? lhs / rhs : 0.0;
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (lhs > rhs * (1.0 + 1e-9) + 1e-13) ++r.violations;
  }
  return r;
}

struct IncrementResult {
  int instances = 0;
  double max_C_ratio = 0.0;  // |ω(b+l)·h| / (|b+l|^{M−min(γ,δ)} |h|)
  double max_D_ratio = 0.0;  // |h| / |b+l|^μ
};

/// Premises with explicit C, D, γ, μ, δ on ω = 2a (‖a‖² model); reports the
/// empirical constants C⁺, D⁺ realised by the conclusion.
inline IncrementResult incrementini_suite(int count, std::uint64_t seed, double C, double D, double gamma,
                                          double mu, double delta, double R) {
  IncrementResult res;
  const double M = 1.0;
  int attempts = 0;
  auto rnd_int_vec = [](std::mt19937_64& gen, double radius) {
    std::uniform_int_distribution<long> c(-static_cast<long>(radius), static_cast<long>(radius));
    IVec v(2);
    do {
      v << c(gen), c(gen);
    } while (to_real(v).norm() > radius);
    return v;
  };
  while (res.instances < count && attempts < 400 * count) {
    auto gen = stream(seed, "incrementini", static_cast<std::uint64_t>(attempts++));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double scale = R * std::pow(10.0, 3.0 * u01(gen));
    const double th = 2.0 * M_PI * u01(gen);
    IVec a(2);
    a << std::llround(scale * std::cos(th)), std::llround(scale * std::sin(th));
    const Vec ar = to_real(a);
    if (ar.norm() < 1.0) continue;
    // k and h from the premises at a + k
    const IVec k = rnd_int_vec(gen, D * std::pow(ar.norm(), mu));
    const Vec ak = to_real(a + k);
    if (ak.norm() < R || to_real(k).norm() > D * std::pow(ak.norm(), mu)) continue;
    // h nearly orthogonal to ω(a+k): step along the perpendicular and round
    const Vec perp = (Vec(2) << -ak[1], ak[0]).finished();
    const double hmax = D * std::pow(ak.norm(), mu);
    const double hl = 1.0 + (hmax - 1.0) * u01(gen);
    IVec h(2);
    h << std::llround(hl * perp.normalized()[0]), std::llround(hl * perp.normalized()[1]);
    const Vec hr = to_real(h);
    if (hr.norm() == 0.0 || hr.norm() > hmax) continue;
    if (std::abs(2.0 * ak.dot(hr)) > C * std::pow(ak.norm(), M - gamma) * hr.norm()) continue;
    // b near a, l small at b + l
    const IVec bma = rnd_int_vec(gen, D * std::pow(ar.norm(), 1.0 - delta));
    const IVec b = a + bma;
    const IVec l = rnd_int_vec(gen, D * std::pow(to_real(b).norm(), mu));
    const Vec bl = to_real(b + l);
    if (bl.norm() == 0.0 || to_real(l).norm() > D * std::pow(bl.norm(), mu)) continue;
    ++res.instances;
    const double cr = std::abs(2.0 * bl.dot(hr)) / (std::pow(bl.norm(), M - std::min(gamma, delta)) * hr.norm());
    const double dr = hr.norm() / std::pow(bl.norm(), mu);
    res.max_C_ratio = std::max(res.max_C_ratio, cr);
    res.max_D_ratio = std::max(res.max_D_ratio, dr);
  }
  return res;
}

}  // namespace nekho::props
