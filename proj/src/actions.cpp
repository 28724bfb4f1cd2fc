// SPDX-License-Identifier: Apache-2.0
#include "nekho/actions.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nekho {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

double root_in(const std::function<double(double)>& f, double lo, double hi) {
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 300;
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw Error(ErrorCode::Numerical, "root not bracketed");
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

// Turning point polish: a few Newton steps on g with derivative dg.
double newton_polish(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                     double x) {
  for (int i = 0; i < 4; ++i) {
    const double d = dg(x);
    if (d == 0.0) break;
    const double step = g(x) / d;
    if (!std::isfinite(step) || std::abs(step) > 1e-6 * std::max(1.0, std::abs(x))) break;
    x -= step;
  }
  return x;
}

// Solve F(E) = 0 where F is increasing, F(Emin) < 0.
double increasing_root(const std::function<double(double)>& F, double Emin, double scale,
                       const std::string& what) {
  double hi = Emin + std::max(scale, 1e-12);
  int n = 0;
  while (F(hi) <= 0.0) {
    hi = Emin + 2.0 * (hi - Emin);
    if (++n > 200) {
      std::ostringstream os;
      os << what << ": no sign change of the action equation for E in [" << Emin << ", " << hi << "]";
      throw Error(ErrorCode::Numerical, os.str());
    }
  }
  return root_in(F, Emin, hi);
}

// Adaptive Gauss–Kronrod on each panel; the substituted integrands are smooth
// but sharply peaked near the inner turning point when |L| is small.
double panel_integral(const std::function<double(double)>& f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i)
    s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo + i * h, lo + (i + 1) * h, 15,
                                                                        1e-13);
  return s;
}

double anharmonic_ar_unchecked(double E, double L, int ell, int panels) {
  double rm = 0.0, rM;
  if (L == 0.0) {
    rM = std::pow(2.0 * ell * E, 1.0 / (2.0 * ell));
  } else {
    std::tie(rm, rM) = anharmonic_turning_points(E, L, ell);
  }
  const double w = rM - rm;
  auto f = [&](double u) {
    const double s = std::sin(u), c = std::cos(u);
    const double r = rm + w * s * s;
    const double v = E - anharmonic_effective_potential(r, L, ell);
    return std::sqrt(std::max(v, 0.0)) * 2.0 * w * s * c;
  };
  return std::sqrt(2.0) / kPi * panel_integral(f, 0.0, 0.5 * kPi, panels);
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double lo, double hi, int panels) {
  if (panels < 1) throw Error(ErrorCode::InvalidArgument, "panels must be >= 1");
  const double h = (hi - lo) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i)
    s += boost::math::quadrature::gauss<double, 30>::integrate(f, lo + i * h, lo + (i + 1) * h);
  return s;
}

// ---------------------------------------------------------------- anharmonic

double anharmonic_effective_potential(double r, double L, int ell) {
  return L * L / (2.0 * r * r) + std::pow(r, 2 * ell) / (2.0 * ell);
}

double anharmonic_L_max(double E, int ell) {
  return std::pow(2.0 * ell * E / (ell + 1.0), (ell + 1.0) / (2.0 * ell));
}

std::pair<double, double> anharmonic_turning_points(double E, double L, int ell) {
  if (ell < 1) throw Error(ErrorCode::InvalidArgument, "ell must be >= 1");
  if (!(E > 0.0) || L == 0.0 || !(std::abs(L) < anharmonic_L_max(E, ell)))
    throw Error(ErrorCode::Domain,
                "(E, L) outside the admissible domain E > 0, 0 < |L| < (2lE/(l+1))^((l+1)/(2l))");
  const double rs = std::pow(std::abs(L), 1.0 / (ell + 1.0));
  auto g = [&](double r) { return E - anharmonic_effective_potential(r, L, ell); };
  auto dg = [&](double r) { return L * L / (r * r * r) - std::pow(r, 2 * ell - 1); };
  double lo = 0.5 * rs;
  while (g(lo) >= 0.0) lo *= 0.5;
  double hi = 2.0 * rs;
  while (g(hi) >= 0.0) hi *= 2.0;
  const double rm = newton_polish(g, dg, root_in(g, lo, rs));
  const double rM = newton_polish(g, dg, root_in(g, rs, hi));
  return {rm, rM};
}

double anharmonic_radial_action(double E, double L, int ell, int panels) {
  if (L == 0.0) throw Error(ErrorCode::Domain, "radial action is defined for L != 0 only");
  return anharmonic_ar_unchecked(E, L, ell, panels);
}

double anharmonic_a1(double E, double L, int ell) {
  if (L == 0.0) throw Error(ErrorCode::Domain, "a1 is defined for L != 0 only");
  const double ar = anharmonic_ar_unchecked(E, L, ell, 4);
  return L > 0.0 ? ar : ar - L;
}

double anharmonic_h0_from_actions(double a1, double a2, int ell) {
  if (ell < 1) throw Error(ErrorCode::InvalidArgument, "ell must be >= 1");
  const bool inside = a2 >= 0.0 ? a1 > 0.0 : a1 > -a2;
  if (!inside) throw Error(ErrorCode::Domain, "(a1, a2) is not interior to the anharmonic cone");
  const double target = a2 >= 0.0 ? a1 : a1 + a2;  // required radial action
  const double L = a2;
  const double Emin = (ell + 1.0) / (2.0 * ell) * std::pow(std::abs(L), 2.0 * ell / (ell + 1.0));
  auto F = [&](double E) {
    if (E <= Emin) return -target;
    if (L != 0.0 && !(std::abs(L) < anharmonic_L_max(E, ell))) return -target;
    return anharmonic_ar_unchecked(E, L, ell, 4) - target;
  };
  const double scale = std::pow(std::abs(a1) + std::abs(a2), 2.0 * ell / (ell + 1.0));
  return increasing_root(F, Emin, scale, "anharmonic inversion");
}

// ---------------------------------------------------------------- rotation surfaces

RotationSurface RotationSurface::sphere() {
  return {"sphere", [](double t) { return std::sin(t); }, kPi};
}

RotationSurface RotationSurface::ellipsoid_like(double eps) {
  return {"ellipsoid-like",
          [eps](double t) {
            const double s = std::sin(t);
            return s * (1.0 + eps * s * s);
          },
          kPi};
}

RotationSurface RotationSurface::bumpy(double c) {
  return {"bumpy", [c](double t) { return std::sin(t) + c * std::sin(3.0 * t); }, kPi};
}

double rotation_theta0(const RotationSurface& s) {
  const double edge = 1e-3 * s.length;
  const Chebyshev wide(s.r, edge, s.length - edge, 128);
  constexpr int kGrid = 4000;
  int changes = 0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double prev = wide.derivative(edge, 1);
  for (int i = 1; i <= kGrid; ++i) {
    const double t = edge + (s.length - 2.0 * edge) * i / kGrid;
    const double cur = wide.derivative(t, 1);
    if ((prev > 0.0) != (cur > 0.0)) {
      ++changes;
      bracket_lo = t - (s.length - 2.0 * edge) / kGrid;
      bracket_hi = t;
    }
    prev = cur;
  }
  if (changes != 1)
    throw Error(ErrorCode::Domain, "profile r(theta) must have exactly one critical point, found " +
                                       std::to_string(changes));
  double t0 = root_in([&](double t) { return wide.derivative(t, 1); }, bracket_lo, bracket_hi);
  // Refine on a narrow window where the interpolant is far more accurate.
  const double h = std::min({0.2, 0.5 * t0, 0.5 * (s.length - t0)});
  const Chebyshev local(s.r, t0 - h, t0 + h, 40);
  t0 = root_in([&](double t) { return local.derivative(t, 1); }, t0 - 0.5 * h, t0 + 0.5 * h);
  if (!(local.derivative(t0, 2) < 0.0)) throw Error(ErrorCode::Domain, "critical point of r is not a maximum");
  return t0;
}

namespace {

double rotation_a1_unchecked(double E, double p, const RotationSurface& s, AzimuthConvention conv,
                             int panels, double theta0) {
  const double k = conv == AzimuthConvention::FactorTwo ? 2.0 : 1.0;
  if (p == 0.0) return s.length * std::sqrt(k * E) / kPi;
  const double rho = std::abs(p) / std::sqrt(k * E);
  auto g = [&](double t) { return s.r(t) - rho; };
  double lo = 1e-12 * s.length, hi = s.length * (1.0 - 1e-12);
  if (g(lo) >= 0.0 || g(hi) >= 0.0) throw Error(ErrorCode::Domain, "profile does not reach zero at the poles");
  const double tm = root_in(g, lo, theta0), tM = root_in(g, theta0, hi);
  const double w = tM - tm;
  auto f = [&](double u) {
    const double sn = std::sin(u), cs = std::cos(u);
    const double t = tm + w * sn * sn;
    const double r = s.r(t);
    return std::sqrt(std::max(k * E - p * p / (r * r), 0.0)) * 2.0 * w * sn * cs;
  };
  return panel_integral(f, 0.0, 0.5 * kPi, panels) / kPi + std::abs(p);
}

}  // namespace

double rotation_a1(double E, double p_phi, const RotationSurface& s, AzimuthConvention conv,
                   int panels) {
  if (p_phi == 0.0) throw Error(ErrorCode::Domain, "a1 is defined for p_phi != 0 only");
  const double t0 = rotation_theta0(s);
  const double r0 = s.r(t0);
  const double k = conv == AzimuthConvention::FactorTwo ? 2.0 : 1.0;
  if (!(E > 0.0) || !(p_phi * p_phi < k * r0 * r0 * E))
    throw Error(ErrorCode::Domain, "(E, p_phi) inadmissible: need p_phi^2 < k r(theta0)^2 E");
  return rotation_a1_unchecked(E, p_phi, s, conv, panels, t0);
}

double rotation_h0_from_actions(double a1, double a2, const RotationSurface& s,
                                AzimuthConvention conv) {
  if (!(a1 > std::abs(a2))) throw Error(ErrorCode::Domain, "need a1 > |a2| (interior of the cone)");
  const double k = conv == AzimuthConvention::FactorTwo ? 2.0 : 1.0;
  if (a2 == 0.0) {
    const double q = kPi * a1 / s.length;
    return q * q / k;
  }
  const double t0 = rotation_theta0(s);
  const double r0 = s.r(t0);
  const double Emin = a2 * a2 / (k * r0 * r0);
  auto F = [&](double E) {
    if (E <= Emin * (1.0 + 1e-15)) return std::abs(a2) - a1;
    return rotation_a1_unchecked(E, a2, s, conv, 4, t0) - a1;
  };
  return increasing_root(F, Emin, a1 * a1, "rotation inversion");
}

std::array<double, 4> taylor_betas(const RotationSurface& s, int order) {
  if (order < 4) throw Error(ErrorCode::InvalidArgument, "taylor_betas needs order >= 4");
  const double t0 = rotation_theta0(s);
  const double h = std::min({0.25, 0.5 * t0, 0.5 * (s.length - t0)});
  auto f = [&](double t) {
    const double r = s.r(t);
    return 1.0 / (2.0 * r * r);
  };
  const Chebyshev c(f, t0 - h, t0 + h, 40);
  return {f(t0), c.derivative(t0, 2), c.derivative(t0, 3), c.derivative(t0, 4)};
}

// ---------------------------------------------------------------- adapters

namespace {

FrequencyModel polar_model(std::string name, double deg, const Chebyshev& g) {
  auto split = [](const Vec& a, double& r, double& th) {
    r = a.norm();
    th = std::atan2(a[1], a[0]);
  };
  auto h0 = [=](const Vec& a) {
    double r, th;
    split(a, r, th);
    return std::pow(r, deg) * g(th);
  };
  auto omega = [=](const Vec& a) {
    double r, th;
    split(a, r, th);
    Vec out = Vec::Zero(2);
    if (r == 0.0) return out;
    const Eigen::Vector2d er(std::cos(th), std::sin(th)), et(-std::sin(th), std::cos(th));
    const double rm = std::pow(r, deg - 1.0);
    const Eigen::Vector2d w = deg * rm * g(th) * er + rm * g.derivative(th, 1) * et;
    out << w[0], w[1];
    return out;
  };
  auto hess = [=](const Vec& a) {
    double r, th;
    split(a, r, th);
    Mat H = Mat::Zero(2, 2);
    if (r == 0.0) return H;
    const Eigen::Vector2d er(std::cos(th), std::sin(th)), et(-std::sin(th), std::cos(th));
    const double G = g(th), G1 = g.derivative(th, 1), G2 = g.derivative(th, 2);
    const double rd2 = std::pow(r, deg - 2.0);
    const double frr = deg * (deg - 1.0) * rd2 * G;
    const double ftt = (deg * G + G2) * rd2;           // f_r/r + f_θθ/r²
    const double frt = (deg - 1.0) * G1 * rd2;          // f_rθ/r − f_θ/r²
    const Eigen::Matrix2d M = frr * er * er.transpose() + ftt * et * et.transpose() +
                              frt * (er * et.transpose() + et * er.transpose());
    H = M;
    return H;
  };
  return FrequencyModel(std::move(name), 2, deg, h0, omega, hess);
}

double profile_error(const Chebyshev& g, const std::function<double(double)>& direct) {
  double err = 0.0;
  for (int i = 1; i <= 7; ++i) {
    const double t = g.lo() + (g.hi() - g.lo()) * (i + 0.37) / 8.6;
    const double v = direct(t);
    err = std::max(err, std::abs(g(t) - v) / std::abs(v));
  }
  return err;
}

}  // namespace

ActionModel anharmonic_frequency_model(int ell, int nodes) {
  const double deg = 2.0 * ell / (ell + 1.0);
  auto direct = [ell](double th) { return anharmonic_h0_from_actions(std::cos(th), std::sin(th), ell); };
  Chebyshev g(direct, -0.25 * kPi, 0.5 * kPi, nodes);
  const double err = profile_error(g, direct);
  return {polar_model("anharmonic-l" + std::to_string(ell), deg, g), err, g};
}

ActionModel rotation_frequency_model(const RotationSurface& s, int nodes) {
  if (s.name == "sphere") {
    Mat G = Mat::Zero(2, 2);
    G(0, 0) = 0.5;
    auto fm = FrequencyModel::quadratic(G, "rotation-sphere");
    Chebyshev g([](double th) { return 0.5 * std::cos(th) * std::cos(th); }, -0.25 * kPi, 0.25 * kPi, 16);
    return {fm, 0.0, g};
  }
  auto direct = [&s](double th) { return rotation_h0_from_actions(std::cos(th), std::sin(th), s); };
  Chebyshev g(direct, -0.25 * kPi, 0.25 * kPi, nodes);
  const double err = profile_error(g, direct);
  return {polar_model("rotation-" + s.name, 2.0, g), err, g};
}

}  // namespace nekho
