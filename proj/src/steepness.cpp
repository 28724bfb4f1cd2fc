// SPDX-License-Identifier: Apache-2.0
#include "nekho/steepness.hpp"

#include "nekho/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nekho {

double arnold_determinant(const FrequencyModel& fm, const Vec& a) {
  if (fm.dim() != 2 || a.size() != 2)
    throw Error(ErrorCode::InvalidArgument, "Arnold determinant is implemented for d = 2 only");
  const Vec g = fm.omega(a);
  const Mat H = fm.hessian(a);
  Eigen::Matrix3d B;
  B << H(0, 0), H(0, 1), g[0], H(1, 0), H(1, 1), g[1], g[0], g[1], 0.0;
  return B.determinant();
}

double arnold_determinant_expansion(double a0, double a1, double a2, double deg, double y) {
  return -std::pow(y, 3.0 * deg - 4.0) * deg * a0 * (deg * a0 * a2 - (deg - 1.0) * a1 * a1);
}

bool check_steep_fin(double a0, double a1, double a2, double deg, double tol) {
  const double s0 = std::max(1.0, std::abs(a0));
  if (std::abs(a0) < tol * s0 && std::abs(a0) < tol) return false;
  const double t1 = deg * a0 * a2, t2 = (deg - 1.0) * a1 * a1;
  const double scale = std::max({1.0, std::abs(t1), std::abs(t2)});
  return std::abs(t1 - t2) >= tol * scale;
}

std::pair<double, double> birkhoff_coefficients(double A, double B, double C) {
  if (!(A > 0.0)) throw Error(ErrorCode::Domain, "A must be positive (nondegenerate minimum)");
  return {std::sqrt(A), (-5.0 * B * B + 3.0 * A * C) / (48.0 * A * A)};
}

double rotation_condition_value(double b0, double b2, double b3, double b4) {
  if (b2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b0 * (-5.0 * b3 * b3 + 3.0 * b2 * b4) / (24.0 * b2 * b2) - b2;
}

bool check_rotation_condition(double b0, double b2, double b3, double b4, double tol) {
  const double scale = std::max({1.0, std::abs(b0), std::abs(b2), std::abs(b3), std::abs(b4)});
  if (std::abs(b2) < tol * scale) return false;
  return std::abs(rotation_condition_value(b0, b2, b3, b4)) >= tol * scale;
}

Vec sample_annulus(const Cone& cone, int dim, double r, std::uint64_t seed, std::uint64_t index) {
  auto gen = stream(seed, "annulus", index);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> rad(0.5 * r, 2.0 * r);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec u(dim);
    for (int i = 0; i < dim; ++i) u[i] = gauss(gen);
    if (u.norm() == 0.0) continue;
    u.normalize();
    if (!cone.contains(u, -1e-3)) continue;
    return rad(gen) * u;
  }
  throw Error(ErrorCode::Numerical, "cone interior too thin to sample");
}

namespace {

// Orthonormal basis of the complement of w.
Mat complement_basis(const Vec& w) {
  const Eigen::Index d = w.size();
  Mat A(d, 1);
  A.col(0) = w;
  Eigen::HouseholderQR<Mat> qr(A);
  const Mat Q = qr.householderQ() * Mat::Identity(d, d);
  return Q.rightCols(d - 1);
}

}  // namespace

SteepnessReport sample_steepness(const FrequencyModel& fm, const Cone& cone,
                                 const std::vector<double>& alphas, const std::vector<double>& B,
                                 const SteepnessOptions& opt, std::uint64_t seed) {
  const int d = fm.dim();
  SteepnessReport rep;
  rep.method = "sampled-steepness";
  rep.seed = seed;
  rep.fitted_B.assign(static_cast<std::size_t>(std::max(d - 1, 0)),
                      std::numeric_limits<double>::infinity());
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.min_omega = std::numeric_limits<double>::infinity();
  if (d < 2) return rep;  // no proper subspaces: vacuous
  if (static_cast<int>(alphas.size()) < d - 1 || static_cast<int>(B.size()) < d - 1)
    throw Error(ErrorCode::InvalidArgument, "need d-1 steepness indices and coefficients");
  const double M = fm.mom();
  std::vector<double> xis(static_cast<std::size_t>(opt.xi_points));
  const double ximax = opt.r * opt.rbar;
  for (int i = 0; i < opt.xi_points; ++i)
    xis[static_cast<std::size_t>(i)] =
        ximax * std::pow(10.0, -3.0 * (opt.xi_points - 1 - i) / std::max(1, opt.xi_points - 1));

  for (int n = 0; n < opt.samples; ++n) {
    const Vec a = sample_annulus(cone, d, opt.r, seed, static_cast<std::uint64_t>(n));
    const Vec w = fm.omega(a);
    rep.min_omega = std::min(rep.min_omega, w.norm());
    if (w.norm() == 0.0) {
      rep.pass = false;
      continue;
    }
    ++rep.points;
    const Mat perp = complement_basis(w);
    auto gen = stream(seed, "steep-subspace", static_cast<std::uint64_t>(n));
    std::normal_distribution<double> gauss;
    for (int s = 1; s <= d - 1; ++s) {
      Mat coeff(d - 1, s);
      for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff.data()[i] = gauss(gen);
      Eigen::HouseholderQR<Mat> qr(coeff);
      const Mat Qc = (qr.householderQ() * Mat::Identity(d - 1, d - 1)).leftCols(s);
      const Mat basis = perp * Qc;  // d x s, orthonormal, ⟂ ω(a)
      std::vector<Vec> dirs;
      for (int i = 0; i < s; ++i) {
        dirs.push_back(basis.col(i));
        dirs.push_back(-basis.col(i));
      }
      if (s >= 2)
        for (int i = 0; i < opt.directions; ++i) {
          Vec c(s);
          for (int j = 0; j < s; ++j) c[j] = gauss(gen);
          dirs.push_back(basis * c.normalized());
        }
      ++rep.subspaces;
      const double alpha = alphas[static_cast<std::size_t>(s - 1)];
      const double Bs = B[static_cast<std::size_t>(s - 1)];
      // Running max over η shared across the ξ grid: η grids are nested per ξ.
      for (double xi : xis) {
        double best = 0.0;
        for (int e = 0; e < opt.eta_points; ++e) {
          const double eta = xi * e / std::max(1, opt.eta_points - 1);
          double worst = std::numeric_limits<double>::infinity();
          for (const auto& u : dirs) {
            const Vec proj = basis.transpose() * fm.omega(a + eta * u);
            worst = std::min(worst, proj.norm());
          }
          best = std::max(best, worst);
        }
        const double unit = std::pow(opt.r, M - alpha) * std::pow(xi, alpha);
        auto& fb = rep.fitted_B[static_cast<std::size_t>(s - 1)];
        fb = std::min(fb, best / unit);
        const double bound = Bs * unit;
        const double margin = best / bound;
        rep.min_margin = std::min(rep.min_margin, margin);
        if (best < bound) {
          rep.pass = false;
          if (rep.witnesses.size() < opt.max_witnesses) {
            SteepnessWitness wt;
            wt.a = a;
            for (int i = 0; i < s; ++i) wt.subspace.push_back(basis.col(i));
            wt.xi = xi;
            wt.value = best;
            wt.bound = bound;
            rep.witnesses.push_back(std::move(wt));
          }
        }
      }
    }
  }
  std::sort(rep.witnesses.begin(), rep.witnesses.end(),
            [](const SteepnessWitness& x, const SteepnessWitness& y) {
              return x.value / x.bound < y.value / y.bound;
            });
  return rep;
}

SteepnessReport niederman_check(const FrequencyModel& fm, const Cone& cone,
                                const NiedermanOptions& opt, std::uint64_t seed) {
  const int d = fm.dim();
  SteepnessReport rep;
  rep.method = "niederman";
  rep.seed = seed;
  rep.min_omega = std::numeric_limits<double>::infinity();
  rep.min_margin = std::numeric_limits<double>::infinity();
  if (d < 2) return rep;
  const double hw = opt.half_width * opt.r;
  const double spacing = 2.0 * hw / std::max(1, opt.starts - 1);
  for (int n = 0; n < opt.samples; ++n) {
    const Vec a = sample_annulus(cone, d, opt.r, seed, static_cast<std::uint64_t>(n));
    const Vec w = fm.omega(a);
    rep.min_omega = std::min(rep.min_omega, w.norm());
    if (!(w.norm() > 0.0)) {
      rep.pass = false;
      continue;
    }
    ++rep.points;
    const Mat perp = complement_basis(w);
    auto gen = stream(seed, "niederman-line", static_cast<std::uint64_t>(n));
    std::normal_distribution<double> gauss;
    Vec c(d - 1);
    for (int i = 0; i < d - 1; ++i) c[i] = gauss(gen);
    const Vec u = perp * c.normalized();
    ++rep.subspaces;
    const double scale = w.norm();
    auto gp = [&](double t) { return fm.omega(a + t * u).dot(u); };
    auto gpp = [&](double t) { return u.dot(fm.hessian(a + t * u) * u); };
    std::vector<double> crit;
    for (int i = 0; i < opt.starts; ++i) {
      double t = -hw + spacing * i;
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        const double g1 = gp(t);
        if (std::abs(g1) <= opt.tol * scale) {
          ok = true;
          break;
        }
        const double g2 = gpp(t);
        if (std::abs(g2) < 1e-14 * scale) break;
        t -= g1 / g2;
        if (std::abs(t) > 2.0 * hw) break;
      }
      if (ok && std::abs(t) <= hw) crit.push_back(t);
    }
    std::sort(crit.begin(), crit.end());
    // A chain of critical points closer than the start spacing traces a curve.
    std::size_t lo = 0;
    double widest = 0.0;
    for (std::size_t i = 1; i <= crit.size(); ++i) {
      if (i == crit.size() || crit[i] - crit[i - 1] > 1.5 * spacing) {
        if (i > lo) widest = std::max(widest, crit[i - 1] - crit[lo]);
        lo = i;
      }
    }
    if (widest > 10.0 * opt.tol * opt.r + 1e-9) {
      rep.pass = false;
      if (rep.witnesses.size() < 16) {
        SteepnessWitness wt;
        wt.a = a;
        wt.subspace = {u};
        wt.xi = widest;
        wt.value = 0.0;
        wt.bound = widest;
        rep.witnesses.push_back(std::move(wt));
      }
    }
  }
  rep.min_margin = rep.pass ? 1.0 : 0.0;
  return rep;
}

}  // namespace nekho
