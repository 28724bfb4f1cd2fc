// SPDX-License-Identifier: Apache-2.0
//
// Resonance predicates, the nonresonant region, resonant zones Z^(s)_M and
// saturated resonance modules.

#pragma once

#include "nekho/core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nekho {

/// Saturated sublattice M = Span_R(M) ∩ Z^d, stored by its canonical HNF basis.
class ResonanceModule {
 public:
  ResonanceModule() = default;
  static ResonanceModule zero(int dim);
  static ResonanceModule full(int dim);
  /// Smallest saturated module containing every input vector.
  static ResonanceModule saturate(int dim, const std::vector<IVec>& vectors);

  int ambient_dim() const { return dim_; }
  int rank() const { return static_cast<int>(basis_.size()); }
  const std::vector<IVec>& basis() const { return basis_; }
  /// Orthogonal complement lattice; m ∈ M iff every row annihilates m.
  const std::vector<IVec>& annihilator() const { return annihilator_; }

  bool contains(const IVec& m) const;
  bool contains_module(const ResonanceModule& other) const;
  /// Smith invariants all equal to one.
  bool is_saturated() const;
  std::string key() const;

  friend bool operator==(const ResonanceModule& a, const ResonanceModule& b) {
    return a.dim_ == b.dim_ && a.key_ == b.key_;
  }
  friend bool operator<(const ResonanceModule& a, const ResonanceModule& b) {
    if (a.rank() != b.rank()) return a.rank() < b.rank();
    return a.key_ < b.key_;
  }

 private:
  static ResonanceModule from_saturated_basis(int dim, std::vector<IVec> basis);

  int dim_ = 0;
  std::vector<IVec> basis_;
  std::vector<IVec> annihilator_;
  std::string key_;
};

/// Order-j resonance bookkeeping for one base point: bit (j-1) of `orders`
/// is set when the base point is resonant with k at order j.
struct ResonantVector {
  IVec k;
  double knorm = 0.0;
  std::uint32_t orders = 0;
  bool at_order(int j) const { return (orders >> (j - 1)) & 1U; }
};

struct ResonanceRecord {
  std::size_t point = 0;
  int sigma = 0;
  std::vector<IVec> vectors;
  std::vector<int> orders;
};

/// Resonance predicates for fixed parameters and frequency model.
class ResonanceTester {
 public:
  ResonanceTester(const NekhoroshevParams& p, const FrequencyModel& fm);

  const NekhoroshevParams& params() const { return params_; }
  const FrequencyModel& model() const { return fm_; }
  const std::vector<double>& gammas() const { return gammas_; }
  int dim() const { return fm_.dim(); }

  /// |a| >= R, |omega(a).k| <= |a|^delta |k|, |k| <= |a|^mu.
  bool resonant(const Vec& a, const IVec& k) const;
  /// |a| >= R, |k| <= D_j |a|^mu, |omega(a).k| <= C_j |k| |a|^{M - gamma_j}.
  bool resonant_order(const Vec& a, const IVec& k, int j) const;
  /// Same test with omega(a) and |a| precomputed.
  bool resonant_order(const Vec& omega, double anorm, const Vec& k, double knorm, int j) const;
  /// Bitmask over j = 1..d.
  std::uint32_t order_mask(const Vec& omega, double anorm, const Vec& k, double knorm) const;

  /// Largest |k| that can be resonant at any order for |a| <= r.
  double k_bound(double r) const;

 private:
  NekhoroshevParams params_;
  const FrequencyModel& fm_;
  std::vector<double> gammas_;
};

bool is_resonant(const Vec& a, const IVec& k, const NekhoroshevParams& p, const FrequencyModel& fm);
bool is_resonant_order(const Vec& a, const IVec& k, int j, const NekhoroshevParams& p,
                       const FrequencyModel& fm);

/// All nonzero integer vectors with |k| <= radius, sorted by norm then lexicographically.
std::vector<IVec> integer_ball(int dim, double radius);

/// Exhaustive computation over a lattice of resonance sets, Ω and every
/// witnessed zone Z^(s)_M.
class ResonanceAnalysis {
 public:
  struct Membership {
    int rank = 0;
    std::size_t module = 0;  // index into modules()
    ResonanceRecord witness;
  };

  ResonanceAnalysis(const Lattice& lat, const NekhoroshevParams& p, const FrequencyModel& fm,
                    int threads = 1);

  const Lattice& lattice() const { return lat_; }
  const ResonanceTester& tester() const { return tester_; }
  const NekhoroshevParams& params() const { return tester_.params(); }

  bool in_omega(std::size_t id) const { return omega_[id]; }
  std::vector<std::size_t> omega_points() const;

  const std::vector<ResonanceModule>& modules() const { return modules_; }
  std::vector<std::size_t> modules_of_rank(int s) const;
  std::optional<std::size_t> module_index(const ResonanceModule& m) const;

  /// Zones containing the point, one entry per module.
  const std::vector<Membership>& memberships(std::size_t id) const { return member_[id]; }
  /// Members of Z^(s)_M in increasing id order.
  const std::vector<std::size_t>& zone(std::size_t module) const { return zones_[module]; }
  bool in_zone(std::size_t id, std::size_t module) const;
  /// True when the point lies in some zone of rank s.
  bool in_any_zone_of_rank(std::size_t id, int s) const;

  /// Resonance set of a lattice point as a base point (all orders).
  const std::vector<ResonantVector>& resonances(std::size_t id) const { return res_[id]; }

  /// Points with |a| <= N - D_d N^mu; exhaustive claims are restricted to these.
  bool interior_safe(std::size_t id) const { return lat_.norm(id) <= interior_radius_; }
  double interior_radius() const { return interior_radius_; }

 private:
  void add_membership(std::size_t id, const std::vector<IVec>& ks, int sigma,
                      std::map<std::string, std::size_t>& local_keys);

  const Lattice& lat_;
  ResonanceTester tester_;
  double interior_radius_ = 0.0;
  std::vector<std::vector<ResonantVector>> res_;
  std::vector<bool> omega_;
  std::vector<ResonanceModule> modules_;
  std::map<std::string, std::size_t> module_lookup_;
  std::vector<std::vector<Membership>> member_;
  std::vector<std::vector<std::size_t>> zones_;
};

/// Ω as the set of lattice ids.
std::vector<std::size_t> nonresonant_region(const Lattice& lat, const NekhoroshevParams& p,
                                            const FrequencyModel& fm);

/// Direct exhaustive witness search for a ∈ Z^(s)_M, s = rank M.
std::optional<ResonanceRecord> resonant_zone_membership(std::size_t point,
                                                        const ResonanceModule& M,
                                                        const Lattice& lat,
                                                        const NekhoroshevParams& p,
                                                        const FrequencyModel& fm);

/// All saturated modules of rank s witnessed by some lattice point.
std::vector<ResonanceModule> collect_modules(const Lattice& lat, const NekhoroshevParams& p,
                                             const FrequencyModel& fm, int s);

}  // namespace nekho
