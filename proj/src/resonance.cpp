// SPDX-License-Identifier: Apache-2.0
#include "nekho/resonance.hpp"

#include "nekho/intlattice.hpp"
#include "nekho/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace nekho {

// ---------------------------------------------------------------- modules

ResonanceModule ResonanceModule::from_saturated_basis(int dim, std::vector<IVec> basis) {
  ResonanceModule m;
  m.dim_ = dim;
  m.basis_ = intlattice::hermite_normal_form(std::move(basis), dim);
  m.annihilator_ = intlattice::kernel(m.basis_, dim);
  std::ostringstream os;
  os << dim << ':';
  for (const auto& b : m.basis_) os << format_ivec(b);
  m.key_ = os.str();
  return m;
}

ResonanceModule ResonanceModule::zero(int dim) { return from_saturated_basis(dim, {}); }

ResonanceModule ResonanceModule::full(int dim) {
  std::vector<IVec> e;
  for (int i = 0; i < dim; ++i) e.push_back(IVec::Unit(dim, i));
  return from_saturated_basis(dim, e);
}

ResonanceModule ResonanceModule::saturate(int dim, const std::vector<IVec>& vectors) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "module dimension must be >= 1");
  std::vector<IVec> nz;
  for (const auto& v : vectors) {
    if (v.size() != dim) throw Error(ErrorCode::InvalidArgument, "vector dimension mismatch");
    if (!v.isZero()) nz.push_back(v);
  }
  if (nz.empty()) return zero(dim);
  // Span_R(v) ∩ Z^d is the kernel of the kernel.
  const auto ann = intlattice::kernel(nz, dim);
  if (ann.empty()) return full(dim);
  return from_saturated_basis(dim, intlattice::kernel(ann, dim));
}

bool ResonanceModule::contains(const IVec& m) const {
  if (m.size() != dim_) return false;
  for (const auto& r : annihilator_)
    if (r.dot(m) != 0) return false;
  return true;
}

bool ResonanceModule::contains_module(const ResonanceModule& other) const {
  for (const auto& b : other.basis_)
    if (!contains(b)) return false;
  return true;
}

bool ResonanceModule::is_saturated() const {
  return intlattice::maximal_minor_gcd(basis_, dim_) == 1;
}

std::string ResonanceModule::key() const { return key_; }

// ---------------------------------------------------------------- predicates

ResonanceTester::ResonanceTester(const NekhoroshevParams& p, const FrequencyModel& fm)
    : params_(p), fm_(fm), gammas_(p.gammas(fm.mom())) {
  const auto d = static_cast<std::size_t>(fm.dim());
  if (p.C.size() < d || p.D.size() < d)
    throw Error(ErrorCode::Config, "C and D need one entry per order 1..d");
}

bool ResonanceTester::resonant(const Vec& a, const IVec& k) const {
  const double an = a.norm();
  if (an < params_.R) return false;
  const Vec kr = to_real(k);
  const double kn = kr.norm();
  if (kn == 0.0) return false;
  if (kn > std::pow(an, params_.mu)) return false;
  return std::abs(fm_.omega(a).dot(kr)) <= std::pow(an, params_.delta) * kn;
}

bool ResonanceTester::resonant_order(const Vec& a, const IVec& k, int j) const {
  const Vec kr = to_real(k);
  return resonant_order(fm_.omega(a), a.norm(), kr, kr.norm(), j);
}

bool ResonanceTester::resonant_order(const Vec& omega, double anorm, const Vec& k, double knorm,
                                     int j) const {
  if (j < 1 || j > dim()) throw Error(ErrorCode::InvalidArgument, "order j out of range");
  if (anorm < params_.R || knorm == 0.0) return false;
  if (knorm > params_.D_at(j) * std::pow(anorm, params_.mu)) return false;
  const double M = fm_.mom();
  return std::abs(omega.dot(k)) <=
         params_.C_at(j) * knorm * std::pow(anorm, M - gammas_[static_cast<std::size_t>(j - 1)]);
}

std::uint32_t ResonanceTester::order_mask(const Vec& omega, double anorm, const Vec& k,
                                          double knorm) const {
  std::uint32_t mask = 0;
  for (int j = 1; j <= dim(); ++j)
    if (resonant_order(omega, anorm, k, knorm, j)) mask |= 1U << (j - 1);
  return mask;
}

double ResonanceTester::k_bound(double r) const {
  return params_.D_max() * std::pow(std::max(r, 1.0), params_.mu);
}

bool is_resonant(const Vec& a, const IVec& k, const NekhoroshevParams& p, const FrequencyModel& fm) {
  NekhoroshevParams q = p;
  // The order-free predicate does not consult C or D.
  q.C.resize(static_cast<std::size_t>(fm.dim()), 1.0);
  q.D.resize(static_cast<std::size_t>(fm.dim()), 1.0);
  return ResonanceTester(q, fm).resonant(a, k);
}

bool is_resonant_order(const Vec& a, const IVec& k, int j, const NekhoroshevParams& p,
                       const FrequencyModel& fm) {
  return ResonanceTester(p, fm).resonant_order(a, k, j);
}

std::vector<IVec> integer_ball(int dim, double radius) {
  std::vector<IVec> out;
  if (radius < 1.0) return out;
  const auto r = static_cast<std::int64_t>(std::floor(radius + 1e-9));
  const double r2 = radius * radius * (1.0 + 1e-12);
  IVec n = IVec::Constant(dim, -r);
  while (true) {
    const double sq = static_cast<double>(n.squaredNorm());
    if (sq > 0 && sq <= r2) out.push_back(n);
    int i = dim - 1;
    while (i >= 0 && n[i] == r) n[i--] = -r;
    if (i < 0) break;
    ++n[i];
  }
  std::stable_sort(out.begin(), out.end(), [](const IVec& a, const IVec& b) {
    const auto na = a.squaredNorm(), nb = b.squaredNorm();
    if (na != nb) return na < nb;
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
  });
  return out;
}

// ---------------------------------------------------------------- analysis

namespace {

// Floating Gram–Schmidt independence test; inputs are small integer vectors.
bool independent_of(const std::vector<Vec>& ortho, const Vec& k, Vec* residual) {
  Vec r = k;
  for (const auto& q : ortho) r -= q.dot(r) * q;
  for (const auto& q : ortho) r -= q.dot(r) * q;
  if (r.norm() <= 1e-9 * std::max(1.0, k.norm())) return false;
  if (residual) *residual = r / r.norm();
  return true;
}

}  // namespace

ResonanceAnalysis::ResonanceAnalysis(const Lattice& lat, const NekhoroshevParams& p,
                                     const FrequencyModel& fm, int threads)
    : lat_(lat), tester_(p, fm) {
  if (fm.dim() != lat.dim()) throw Error(ErrorCode::InvalidArgument, "model/lattice dimension mismatch");
  const int d = lat.dim();
  const double N = lat.radius();
  interior_radius_ = N - p.D_at(d) * std::pow(N, p.mu);
  const std::size_t n = lat.size();

  // Resonance sets of every lattice point as a base point.
  const auto ball = integer_ball(d, tester_.k_bound(N) + 1e-9);
  std::vector<Vec> ball_real;
  std::vector<double> ball_norm;
  for (const auto& k : ball) {
    ball_real.push_back(to_real(k));
    ball_norm.push_back(ball_real.back().norm());
  }
  res_.assign(n, {});
  parallel_for(n, threads, [&](std::size_t id) {
    const double an = lat.norm(id);
    if (an < p.R) return;
    const Vec a = lat.point(id);
    const Vec om = fm.omega(a);
    const double cap = p.D_max() * std::pow(an, p.mu) * (1.0 + 1e-12);
    auto& out = res_[id];
    for (std::size_t i = 0; i < ball.size() && ball_norm[i] <= cap; ++i) {
      const std::uint32_t m = tester_.order_mask(om, an, ball_real[i], ball_norm[i]);
      if (m) out.push_back({ball[i], ball_norm[i], m});
    }
  });

  // Bases: (sigma, k1, base point id). sigma = 1 bases are attached to a = b - k1.
  struct Base {
    int sigma;
    std::size_t k1;  // index into res_[base]
    std::size_t base;
  };
  std::vector<std::vector<Base>> bases(n);
  for (std::size_t id = 0; id < n; ++id) {
    const auto& rs = res_[id];
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (!rs[i].at_order(1)) continue;
      if (lat.find_shifted(id, rs[i].k)) bases[id].push_back({0, i, id});
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    const auto& rs = res_[b];
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (!rs[i].at_order(1)) continue;
      if (auto a = lat.find_shifted(b, -rs[i].k)) bases[*a].push_back({1, i, b});
    }
  }
  omega_.assign(n, false);
  for (std::size_t id = 0; id < n; ++id) omega_[id] = bases[id].empty();

  // Zone memberships by depth-first choice of independent order-graded vectors.
  member_.assign(n, {});
  for (std::size_t id = 0; id < n; ++id) {
    if (bases[id].empty()) continue;
    std::map<std::string, std::size_t> local;
    for (const auto& bs : bases[id]) {
      const auto& rs = res_[bs.base];
      std::set<std::pair<int, std::string>> visited;  // (depth, span key) at this base
      std::vector<IVec> chosen{rs[bs.k1].k};
      std::vector<Vec> ortho{rs[bs.k1].k.cast<double>().normalized()};
      std::function<void(int)> dfs = [&](int depth) {
        add_membership(id, chosen, bs.sigma, local);
        if (depth == d) return;
        if (depth + 1 < d) {
          // Continuations depend only on the span, not on the chosen vectors.
          const auto key = ResonanceModule::saturate(d, chosen).key();
          if (!visited.insert({depth, key}).second) return;
        }
        for (const auto& rv : rs) {
          if (!rv.at_order(depth + 1)) continue;
          Vec q;
          if (!independent_of(ortho, rv.k.cast<double>(), &q)) continue;
          chosen.push_back(rv.k);
          ortho.push_back(q);
          dfs(depth + 1);
          chosen.pop_back();
          ortho.pop_back();
          if (depth + 1 == d) break;  // any completion gives the full module
        }
      };
      dfs(1);
    }
  }
  zones_.assign(modules_.size(), {});
  for (std::size_t id = 0; id < n; ++id)
    for (const auto& m : member_[id]) zones_[m.module].push_back(id);
}

void ResonanceAnalysis::add_membership(std::size_t id, const std::vector<IVec>& ks, int sigma,
                                       std::map<std::string, std::size_t>& local_keys) {
  const int d = lat_.dim();
  const ResonanceModule M = static_cast<int>(ks.size()) == d ? ResonanceModule::full(d)
                                                              : ResonanceModule::saturate(d, ks);
  const std::string key = M.key();
  if (local_keys.count(key)) return;
  auto it = module_lookup_.find(key);
  std::size_t idx;
  if (it == module_lookup_.end()) {
    idx = modules_.size();
    modules_.push_back(M);
    module_lookup_.emplace(key, idx);
  } else {
    idx = it->second;
  }
  local_keys.emplace(key, idx);
  Membership mem;
  mem.rank = M.rank();
  mem.module = idx;
  mem.witness.point = id;
  mem.witness.sigma = sigma;
  mem.witness.vectors = ks;
  for (std::size_t j = 1; j <= ks.size(); ++j) mem.witness.orders.push_back(static_cast<int>(j));
  member_[id].push_back(std::move(mem));
}

std::vector<std::size_t> ResonanceAnalysis::omega_points() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < omega_.size(); ++i)
    if (omega_[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> ResonanceAnalysis::modules_of_rank(int s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < modules_.size(); ++i)
    if (modules_[i].rank() == s && !zones_[i].empty()) out.push_back(i);
  std::sort(out.begin(), out.end(),
            [&](std::size_t a, std::size_t b) { return modules_[a] < modules_[b]; });
  return out;
}

std::optional<std::size_t> ResonanceAnalysis::module_index(const ResonanceModule& m) const {
  auto it = module_lookup_.find(m.key());
  if (it == module_lookup_.end()) return std::nullopt;
  return it->second;
}

bool ResonanceAnalysis::in_zone(std::size_t id, std::size_t module) const {
  for (const auto& m : member_[id])
    if (m.module == module) return true;
  return false;
}

bool ResonanceAnalysis::in_any_zone_of_rank(std::size_t id, int s) const {
  for (const auto& m : member_[id])
    if (m.rank == s) return true;
  return false;
}

// ---------------------------------------------------------------- direct searches

std::vector<std::size_t> nonresonant_region(const Lattice& lat, const NekhoroshevParams& p,
                                            const FrequencyModel& fm) {
  return ResonanceAnalysis(lat, p, fm).omega_points();
}

std::optional<ResonanceRecord> resonant_zone_membership(std::size_t point,
                                                        const ResonanceModule& M,
                                                        const Lattice& lat,
                                                        const NekhoroshevParams& p,
                                                        const FrequencyModel& fm) {
  const int s = M.rank();
  const int d = lat.dim();
  if (s < 1 || s > d) throw Error(ErrorCode::InvalidArgument, "module rank must be in 1..d");
  const ResonanceTester t(p, fm);
  // Every base point lies in the truncated ball, so this bounds every k_j.
  std::vector<IVec> cand;
  for (const auto& k : integer_ball(d, t.k_bound(lat.radius()) + 1e-9))
    if (M.contains(k)) cand.push_back(k);
  const Vec a = lat.point(point);
  for (int sigma = 0; sigma <= 1; ++sigma) {
    for (const auto& k1 : cand) {
      if (!lat.find_shifted(point, k1)) continue;
      const Vec base = a + sigma * to_real(k1);
      if (!t.resonant_order(base, k1, 1)) continue;
      std::vector<IVec> chosen{k1};
      std::function<bool(int)> extend = [&](int j) -> bool {
        if (j > s) return true;
        for (const auto& k : cand) {
          std::vector<IVec> trial = chosen;
          trial.push_back(k);
          if (intlattice::rank(trial, d) != j) continue;
          if (!t.resonant_order(base, k, j)) continue;
          chosen.push_back(k);
          if (extend(j + 1)) return true;
          chosen.pop_back();
        }
        return false;
      };
      if (!extend(2)) continue;
      if (!(ResonanceModule::saturate(d, chosen) == M)) continue;
      ResonanceRecord rec;
      rec.point = point;
      rec.sigma = sigma;
      rec.vectors = chosen;
      for (int j = 1; j <= s; ++j) rec.orders.push_back(j);
      return rec;
    }
  }
  return std::nullopt;
}

std::vector<ResonanceModule> collect_modules(const Lattice& lat, const NekhoroshevParams& p,
                                             const FrequencyModel& fm, int s) {
  if (s < 1 || s > lat.dim()) throw Error(ErrorCode::InvalidArgument, "rank must be in 1..d");
  const ResonanceAnalysis an(lat, p, fm);
  std::vector<ResonanceModule> out;
  for (auto i : an.modules_of_rank(s)) out.push_back(an.modules()[i]);
  return out;
}

}  // namespace nekho
