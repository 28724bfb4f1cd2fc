// SPDX-License-Identifier: Apache-2.0
#include "nekho/partition.hpp"

#include "nekho/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace nekho {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void DisjointSets::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
}

std::vector<EquivalenceClass> equivalence_classes(const Lattice& lat,
                                                  const std::vector<std::size_t>& zone,
                                                  const ResonanceModule& M, double mu) {
  std::vector<std::size_t> ids = zone;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<EquivalenceClass> out;
  if (ids.empty()) return out;
  const int d = lat.dim();
  std::map<std::size_t, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
  DisjointSets ds(ids.size());
  if (M.rank() > 0) {
    double rmax = 0.0;
    for (auto id : ids) rmax = std::max(rmax, lat.norm(id));
    std::vector<IVec> hops;
    for (const auto& m : integer_ball(d, std::pow(std::max(rmax, 1.0), mu) + 1e-9))
      if (M.contains(m)) hops.push_back(m);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const double an = lat.norm(ids[i]);
      for (const auto& m : hops) {
        auto b = lat.find_shifted(ids[i], m);
        if (!b) continue;
        auto it = pos.find(*b);
        if (it == pos.end()) continue;
        const double bound = std::max(std::pow(an, mu), std::pow(lat.norm(*b), mu));
        if (to_real(m).norm() <= bound * (1.0 + 1e-12)) ds.unite(i, it->second);
      }
    }
  }
  std::map<std::size_t, std::size_t> root_to_class;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = ds.find(i);
    auto it = root_to_class.find(r);
    if (it == root_to_class.end()) {
      it = root_to_class.emplace(r, out.size()).first;
      EquivalenceClass c;
      c.j = out.size();
      out.push_back(c);
    }
    out[it->second].members.push_back(ids[i]);
  }
  return out;  // ids ascending, so classes are already ordered by smallest member
}

namespace {

void fill_metadata(Block& b, const Lattice& lat) {
  std::sort(b.members.begin(), b.members.end());
  b.min_norm = std::numeric_limits<double>::infinity();
  b.max_norm = 0.0;
  for (auto id : b.members) {
    b.min_norm = std::min(b.min_norm, lat.norm(id));
    b.max_norm = std::max(b.max_norm, lat.norm(id));
  }
  if (b.members.empty()) b.min_norm = 0.0;
  double diam2 = 0.0;
  const int d = lat.dim();
  for (std::size_t i = 0; i < b.members.size(); ++i) {
    const auto* x = lat.integer_data(b.members[i]);
    for (std::size_t k = i + 1; k < b.members.size(); ++k) {
      const auto* y = lat.integer_data(b.members[k]);
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        const double t = static_cast<double>(x[c] - y[c]);
        s += t * t;
      }
      diam2 = std::max(diam2, s);
    }
  }
  b.diameter = std::sqrt(diam2);
}

}  // namespace

BlockPartition::BlockPartition(const ResonanceAnalysis& an) : an_(an) {
  const Lattice& lat = an.lattice();
  const int d = lat.dim();
  const std::size_t n = lat.size();
  const double mu = an.params().mu;

  // A classes, module by module in canonical order.
  for (int s = 1; s <= d; ++s) {
    for (auto mi : an.modules_of_rank(s)) {
      auto cls = equivalence_classes(lat, an.zone(mi), an.modules()[mi], mu);
      for (auto& c : cls) {
        c.module = mi;
        classes_.push_back(std::move(c));
        class_rank_.push_back(s);
      }
    }
  }

  // B layer: Ω singletons, then A^(s) minus every Z^(s+1).
  b_labels_.assign(n, {});
  for (std::size_t id = 0; id < n; ++id) {
    if (!an.in_omega(id)) continue;
    Block b;
    b.s = 0;
    b.kind = 'B';
    b.j = id;
    b.members = {id};
    b_labels_[id].push_back(b_blocks_.size());
    b_blocks_.push_back(std::move(b));
  }
  std::vector<std::size_t> b_of_class(classes_.size(), kNoModule);
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const int s = class_rank_[c];
    Block b;
    b.s = s;
    b.kind = 'B';
    b.module = classes_[c].module;
    b.j = classes_[c].j;
    for (auto id : classes_[c].members)
      if (s == d || !an.in_any_zone_of_rank(id, s + 1)) b.members.push_back(id);
    if (b.members.empty()) continue;
    for (auto id : b.members) b_labels_[id].push_back(b_blocks_.size());
    b_of_class[c] = b_blocks_.size();
    b_blocks_.push_back(std::move(b));
  }

  // E layer in increasing s; each layer avoids the union of earlier E layers.
  e_labels_.assign(n, {});
  std::vector<char> taken(n, 0);  // in some E^(r), r < current s
  for (const auto& b : b_blocks_) {
    if (b.s != 0) continue;
    Block e = b;
    e.kind = 'E';
    e_labels_[b.members[0]].push_back(e_blocks_.size());
    e_blocks_.push_back(std::move(e));
  }
  for (int s = 1; s <= d; ++s) {
    for (std::size_t id = 0; id < n; ++id)
      if (!e_labels_[id].empty()) taken[id] = 1;
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      if (class_rank_[c] != s || b_of_class[c] == kNoModule) continue;
      const Block& bb = b_blocks_[b_of_class[c]];
      const ResonanceModule& M = an.modules()[classes_[c].module];
      const IVec anchor = lat.integer(bb.members.front());
      Block e;
      e.s = s;
      e.kind = 'E';
      e.module = bb.module;
      e.j = bb.j;
      for (auto id : classes_[c].members) {
        if (taken[id]) continue;
        // (B + M) ∩ A: x - b ∈ M for some b ∈ B; all of B is congruent mod M.
        if (!M.contains(IVec(lat.integer(id) - anchor))) continue;
        e.members.push_back(id);
      }
      if (e.members.empty()) continue;
      for (auto id : e.members) e_labels_[id].push_back(e_blocks_.size());
      e_blocks_.push_back(std::move(e));
    }
  }
  for (auto& b : b_blocks_) fill_metadata(b, lat);
  for (auto& e : e_blocks_) fill_metadata(e, lat);
}

PartitionStats BlockPartition::stats() const {
  PartitionStats st;
  const int d = lattice().dim();
  st.blocks_by_s.assign(static_cast<std::size_t>(d + 1), 0);
  for (const auto& e : e_blocks_) ++st.blocks_by_s[static_cast<std::size_t>(e.s)];
  for (std::size_t id = 0; id < lattice().size(); ++id) {
    if (an_.in_any_zone_of_rank(id, d)) ++st.zone_d_points;
    if (!an_.interior_safe(id)) continue;
    ++st.interior_points;
    if (e_labels_[id].empty()) ++st.uncovered;
    if (e_labels_[id].size() > 1) ++st.conflicts;
  }
  return st;
}

std::string BlockPartition::block_name(const Block& b) const {
  std::ostringstream os;
  os << b.kind << b.s << '[';
  if (b.module != kNoModule) {
    const auto& basis = an_.modules()[b.module].basis();
    for (std::size_t i = 0; i < basis.size(); ++i) os << (i ? ";" : "") << format_ivec(basis[i]);
  }
  os << "]#" << b.j;
  return os.str();
}

bool coupled(const ResonanceTester& t, const Vec& a, const Vec& b) {
  const Vec diff = b - a;
  IVec k(diff.size());
  for (Eigen::Index i = 0; i < diff.size(); ++i) k[i] = std::llround(diff[i]);
  if (k.isZero()) return false;
  return t.resonant(a, k) || t.resonant(b, k);
}

InvarianceReport verify_invariance(const BlockPartition& part, int threads) {
  const ResonanceAnalysis& an = part.analysis();
  const Lattice& lat = an.lattice();
  const std::size_t n = lat.size();
  std::vector<std::vector<InvarianceViolation>> found(n);
  std::vector<std::size_t> counted(n, 0);
  parallel_for(n, threads, [&](std::size_t p) {
    // Each coupled pair has a resonant endpoint p with k in its order-1 set:
    // (p, p + k) when p = a, and (p - k, p) when p = b.
    for (const auto& rv : an.resonances(p)) {
      if (!rv.at_order(1)) continue;
      for (int side = 0; side < 2; ++side) {
        const auto other = lat.find_shifted(p, side == 0 ? IVec(rv.k) : IVec(-rv.k));
        if (!other) continue;
        const std::size_t a = side == 0 ? p : *other;
        const std::size_t b = side == 0 ? *other : p;
        if (!an.interior_safe(a) || !an.interior_safe(b)) continue;
        ++counted[p];
        const auto& la = part.e_labels(a);
        const auto& lb = part.e_labels(b);
        if (la.size() != 1 || lb.size() != 1 || la[0] != lb[0]) found[p].push_back({a, b, rv.k});
      }
    }
  });
  InvarianceReport rep;
  for (std::size_t p = 0; p < n; ++p) {
    rep.pairs_checked += counted[p];
    for (auto& v : found[p]) rep.violations.push_back(std::move(v));
  }
  return rep;
}

DyadicReport verify_dyadic_and_diameter(const BlockPartition& part) {
  const ResonanceAnalysis& an = part.analysis();
  const int d = an.lattice().dim();
  const auto gam = an.tester().gammas();
  DyadicReport rep;
  rep.diameter_constant.assign(static_cast<std::size_t>(d + 1), 0.0);
  for (const auto& e : part.e_blocks()) {
    const double r = e.ratio();
    rep.max_ratio = std::max(rep.max_ratio, r);
    if (r > 2.0 + 1e-12) {
      rep.ok = false;
      ++rep.violations;
    }
    if (e.s < d && e.min_norm > 0.0) {
      const double g = gam[static_cast<std::size_t>(e.s)];  // gamma_{s+1}
      auto& c = rep.diameter_constant[static_cast<std::size_t>(e.s)];
      c = std::max(c, e.diameter / std::pow(e.min_norm, 1.0 - g));
    }
  }
  return rep;
}

CalibrationResult calibrate(const Lattice& lat, const NekhoroshevParams& start,
                            const FrequencyModel& fm, const std::vector<double>& R_grid,
                            int max_doublings, int threads, double max_work) {
  CalibrationResult res;
  for (double R : R_grid) {
    NekhoroshevParams p = start;
    p.R = R;
    for (int dbl = 0; dbl <= max_doublings; ++dbl) {
      if (dbl > 0)
        for (std::size_t j = 1; j < p.C.size(); ++j) {
          p.C[j] *= 2.0;
          p.D[j] *= 2.0;
        }
      if (!validate_params(p, fm).ok()) continue;
      // crude memory estimate: lattice points times frequency-ball size
      const double kr = *std::max_element(p.D.begin(), p.D.end()) * std::pow(lat.radius(), p.mu);
      const double work = static_cast<double>(lat.size()) * std::pow(2.0 * kr + 1.0, lat.dim());
      if (work > max_work) {
        std::ostringstream os;
        os << "R=" << R << " doublings=" << dbl << " skipped: work estimate " << work << " exceeds budget";
        res.log.push_back(os.str());
        break;
      }
      const ResonanceAnalysis an(lat, p, fm, threads);
      const BlockPartition part(an);
      const auto st = part.stats();
      const auto inv = verify_invariance(part, threads);
      const auto dy = verify_dyadic_and_diameter(part);
      std::ostringstream os;
      os << "R=" << R << " doublings=" << dbl << " conflicts=" << st.conflicts
         << " uncovered=" << st.uncovered << " zone_d=" << st.zone_d_points
         << " violations=" << inv.violations.size() << " max_ratio=" << dy.max_ratio;
      res.log.push_back(os.str());
      if (st.exact_partition() && st.zone_d_points == 0 && inv.ok() && dy.ok) {
        res.found = true;
        res.params = p;
        res.stats = st;
        res.violations = 0;
        res.dyadic = dy;
        return res;
      }
      // doubling only enlarges the resonant zones; it cannot cure anything but coupling leaks
      if (inv.ok()) break;
    }
  }
  return res;
}

}  // namespace nekho
