// SPDX-License-Identifier: Apache-2.0
#include "nekho/normalform.hpp"

#include "nekho/resonance.hpp"
#include "nekho/rng.hpp"

#include <algorithm>
#include <cmath>

namespace nekho {

namespace {

using Triplet = Eigen::Triplet<cplx>;

template <class Fn>
void for_each_entry(const LatticeOperator& F, Fn&& fn) {
  for (Eigen::Index b = 0; b < F.m.outerSize(); ++b)
    for (SpMat::InnerIterator it(F.m, b); it; ++it)
      fn(static_cast<std::size_t>(b), static_cast<std::size_t>(it.col()), it.value());
}

LatticeOperator build(const Lattice& lat, const std::vector<Triplet>& t, bool herm) {
  return LatticeOperator::from_triplets(lat, t, herm);
}

}  // namespace

LatticeOperator LatticeOperator::zero(const Lattice& lat) {
  LatticeOperator op;
  op.lattice = &lat;
  const auto n = static_cast<Eigen::Index>(lat.size());
  op.m.resize(n, n);
  op.hermitian = true;
  return op;
}

LatticeOperator LatticeOperator::from_triplets(const Lattice& lat, const std::vector<Triplet>& t,
                                               bool hermitian) {
  LatticeOperator op = zero(lat);
  op.m.setFromTriplets(t.begin(), t.end());
  op.m.prune(cplx(0.0, 0.0));
  op.hermitian = hermitian;
  return op;
}

double LatticeOperator::hermiticity_defect() const {
  const SpMat d = m - SpMat(m.adjoint());
  double worst = 0.0;
  for (Eigen::Index b = 0; b < d.outerSize(); ++b)
    for (SpMat::InnerIterator it(d, b); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

double LatticeOperator::max_abs() const {
  double worst = 0.0;
  for (Eigen::Index b = 0; b < m.outerSize(); ++b)
    for (SpMat::InnerIterator it(m, b); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

LatticeOperator LatticeOperator::adjoint() const {
  LatticeOperator op = *this;
  op.m = SpMat(m.adjoint());
  return op;
}

LatticeOperator LatticeOperator::symmetrized() const {
  LatticeOperator op = *this;
  op.m = (m + SpMat(m.adjoint())) * cplx(0.5, 0.0);
  op.m.prune(cplx(0.0, 0.0));
  op.hermitian = true;
  return op;
}

IVec LatticeOperator::offset(std::size_t b, std::size_t a) const {
  const int d = lattice->dim();
  IVec k(d);
  const auto* x = lattice->integer_data(b);
  const auto* y = lattice->integer_data(a);
  for (int i = 0; i < d; ++i) k[i] = x[i] - y[i];
  return k;
}

LatticeOperator operator+(const LatticeOperator& x, const LatticeOperator& y) {
  LatticeOperator op = x;
  op.m = x.m + y.m;
  op.hermitian = x.hermitian && y.hermitian;
  return op;
}

LatticeOperator operator-(const LatticeOperator& x, const LatticeOperator& y) {
  LatticeOperator op = x;
  op.m = x.m - y.m;
  op.hermitian = x.hermitian && y.hermitian;
  return op;
}

double chi(double t) {
  const double x = std::abs(t);
  if (x <= 0.5) return 1.0;
  if (x >= 1.0) return 0.0;
  const double s = 2.0 * (x - 0.5);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

LatticeOperator fourier_coefficient(const LatticeOperator& F, const IVec& k) {
  std::vector<Triplet> t;
  for_each_entry(F, [&](std::size_t b, std::size_t a, cplx v) {
    if (F.offset(b, a) == k) t.emplace_back(static_cast<int>(b), static_cast<int>(a), v);
  });
  return build(*F.lattice, t, false);
}

CutoffValues cutoff_values(const Vec& a, const IVec& k, const NekhoroshevParams& p,
                           const FrequencyModel& fm) {
  CutoffValues c;
  const double an = a.norm();
  c.chi_R = chi(an / p.R);
  if (k.isZero()) {
    c.chi_tilde = 1.0;
    c.chi_k = 1.0;
    c.chi_T = 1.0 - c.chi_R;
    return c;
  }
  const Vec kr = to_real(k);
  const double kn = kr.norm();
  c.chi_tilde = an > 0.0 ? chi(kn / std::pow(an, p.mu)) : 0.0;
  const double wk = fm.omega(a).dot(kr);
  const double den = std::pow(an, p.delta) * kn;
  c.chi_k = den > 0.0 ? chi(wk / den) : 1.0;
  c.chi_T = (1.0 - c.chi_R) * c.chi_k;
  c.one_minus_both = (1.0 - c.chi_R) * (1.0 - c.chi_k);
  c.d_T = c.one_minus_both == 0.0 ? 0.0 : c.one_minus_both / wk;
  return c;
}

OperatorSplit split_operator(const LatticeOperator& F, const NekhoroshevParams& p,
                             const FrequencyModel& fm) {
  const Lattice& lat = *F.lattice;
  std::vector<Triplet> res, nr, sm;
  for_each_entry(F, [&](std::size_t b, std::size_t a, cplx v) {
    const IVec k = F.offset(b, a);
    const CutoffValues c = cutoff_values(lat.point(b), k, p, fm);
    const int ib = static_cast<int>(b), ia = static_cast<int>(a);
    if (k.isZero()) {
      res.emplace_back(ib, ia, (1.0 - c.chi_R) * v);
      sm.emplace_back(ib, ia, c.chi_R * v);
      return;
    }
    res.emplace_back(ib, ia, c.chi_T * c.chi_tilde * v);
    nr.emplace_back(ib, ia, c.one_minus_both * c.chi_tilde * v);
    sm.emplace_back(ib, ia, ((1.0 - c.chi_R) * (1.0 - c.chi_tilde) + c.chi_R) * v);
  });
  OperatorSplit out;
  out.res = build(lat, res, false).symmetrized();
  out.nr = build(lat, nr, false).symmetrized();
  out.smooth = build(lat, sm, false).symmetrized();
  out.identity_defect = (F - (out.res + out.nr + out.smooth)).max_abs();
  return out;
}

LatticeOperator h0_commutator(const LatticeOperator& X, const FrequencyModel& fm) {
  const Lattice& lat = *X.lattice;
  std::vector<double> h(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) h[i] = fm.h0(lat.point(i));
  std::vector<Triplet> t;
  for_each_entry(X, [&](std::size_t b, std::size_t a, cplx v) {
    t.emplace_back(static_cast<int>(b), static_cast<int>(a), cplx(0.0, -1.0) * (h[b] - h[a]) * v);
  });
  return build(lat, t, X.hermitian);
}

CohomologicalSolution solve_cohomological(const LatticeOperator& F, const NekhoroshevParams& p,
                                          const FrequencyModel& fm) {
  const Lattice& lat = *F.lattice;
  auto split = split_operator(F, p, fm);
  std::vector<Triplet> g;
  for_each_entry(F, [&](std::size_t b, std::size_t a, cplx v) {
    const IVec k = F.offset(b, a);
    if (k.isZero()) return;
    const double dT = cutoff_values(lat.point(b), k, p, fm).d_T;
    if (dT != 0.0) g.emplace_back(static_cast<int>(b), static_cast<int>(a), cplx(0.0, -1.0) * dT * v);
  });
  CohomologicalSolution s;
  s.G = build(lat, g, false).symmetrized();
  s.Z = split.res;
  s.smooth = split.smooth;
  s.nr = split.nr;
  s.residual = h0_commutator(s.G, fm) + F - s.Z - s.smooth;
  s.residual.m.prune(cplx(0.0, 0.0));
  s.residual.hermitian = true;
  return s;
}

OrderFit order_fit(const LatticeOperator& F, const OrderFitOptions& opt) {
  const Lattice& lat = *F.lattice;
  const double rmax = opt.rmax > 0.0 ? opt.rmax : lat.radius();
  const double rmin = std::max(opt.rmin, 1e-9);
  if (!(rmax > rmin) || opt.bins < 2) throw Error(ErrorCode::InvalidArgument, "bad radial range for order fit");
  std::vector<double> bmax(static_cast<std::size_t>(opt.bins), 0.0);
  const double lr0 = std::log(rmin), lr1 = std::log(rmax);
  for_each_entry(F, [&](std::size_t b, std::size_t, cplx v) {
    const double r = lat.norm(b);
    if (r < rmin || r > rmax) return;
    auto i = static_cast<std::size_t>((std::log(r) - lr0) / (lr1 - lr0) * opt.bins);
    i = std::min(i, bmax.size() - 1);
    bmax[i] = std::max(bmax[i], std::abs(v));
  });
  OrderFit fit;
  for (int i = 0; i < opt.bins; ++i) {
    const double v = bmax[static_cast<std::size_t>(i)];
    if (!(v > 0.0)) continue;
    fit.bin_radius.push_back(std::exp(lr0 + (i + 0.5) * (lr1 - lr0) / opt.bins));
    fit.bin_value.push_back(v);
  }
  const auto n = fit.bin_radius.size();
  if (static_cast<int>(n) < opt.min_bins)
    throw Error(ErrorCode::InvalidArgument,
                "order fit needs at least " + std::to_string(opt.min_bins) + " populated radial bins, got " +
                    std::to_string(n));
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(fit.bin_radius[i]), y = std::log(fit.bin_value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double dn = static_cast<double>(n);
  const double vx = sxx - sx * sx / dn, vy = syy - sy * sy / dn, cxy = sxy - sx * sy / dn;
  fit.m = vx > 0.0 ? cxy / vx : 0.0;
  fit.intercept = (sy - fit.m * sx) / dn;
  fit.r2 = vy > 1e-300 ? cxy * cxy / (vx * vy) : 1.0;
  return fit;
}

std::size_t normal_form_mask_violations(const LatticeOperator& F, const NekhoroshevParams& p,
                                        const FrequencyModel& fm) {
  const Lattice& lat = *F.lattice;
  auto supported = [&](std::size_t x, const IVec& k) {
    const double xn = lat.norm(x);
    if (!(xn > 0.5 * p.R)) return false;
    const Vec kr = to_real(k);
    const double kn = kr.norm();
    if (!(kn < std::pow(xn, p.mu))) return false;
    return std::abs(fm.omega(lat.point(x)).dot(kr)) < std::pow(xn, p.delta) * kn;
  };
  std::size_t bad = 0;
  for_each_entry(F, [&](std::size_t b, std::size_t a, cplx v) {
    if (a == b || v == cplx(0.0, 0.0)) return;
    const IVec k = F.offset(b, a);
    if (!supported(a, k) && !supported(b, k)) ++bad;
  });
  return bad;
}

LatticeOperator smooth_test_operator(const Lattice& lat, double kmax, double order) {
  const int d = lat.dim();
  const auto ks = integer_ball(d, kmax);
  std::vector<Triplet> t;
  Vec w = Vec::LinSpaced(d, 1.0, static_cast<double>(d));
  for (std::size_t a = 0; a < lat.size(); ++a) {
    const double ba = bracket(lat.norm(a));
    t.emplace_back(static_cast<int>(a), static_cast<int>(a), cplx(std::pow(ba, order), 0.0));
    for (const auto& k : ks) {
      auto b = lat.find_shifted(a, k);
      if (!b) continue;
      const Vec kr = to_real(k);
      const double u = kr.dot(w) / (1.0 + kr.squaredNorm());  // odd in k
      const double env = std::exp(-0.5 * kr.squaredNorm()) *
                         std::pow(0.5 * (ba + bracket(lat.norm(*b))), order);
      t.emplace_back(static_cast<int>(*b), static_cast<int>(a), env * cplx(1.0, 0.5 * u));
    }
  }
  return build(lat, t, true);
}

LatticeOperator random_hermitian(const Lattice& lat, double kmax, std::uint64_t seed) {
  const auto ks = integer_ball(lat.dim(), kmax);
  std::vector<Triplet> t;
  for (std::size_t a = 0; a < lat.size(); ++a) {
    t.emplace_back(static_cast<int>(a), static_cast<int>(a),
                   cplx(2.0 * hash_uniform(seed, a, a, 1) - 1.0, 0.0));
    for (const auto& k : ks) {
      auto b = lat.find_shifted(a, k);
      if (!b || *b < a) continue;
      const double re = 2.0 * hash_uniform(seed, a, *b, 2) - 1.0;
      const double im = 2.0 * hash_uniform(seed, a, *b, 3) - 1.0;
      t.emplace_back(static_cast<int>(*b), static_cast<int>(a), cplx(re, im));
      t.emplace_back(static_cast<int>(a), static_cast<int>(*b), cplx(re, -im));
    }
  }
  return build(lat, t, true);
}

}  // namespace nekho
