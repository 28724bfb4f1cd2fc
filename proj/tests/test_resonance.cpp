// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "property_suites.hpp"

#include "nekho/resonance.hpp"

#include <set>

using namespace nekho;

namespace {

const FrequencyModel& torus2() {
  static const FrequencyModel fm = FrequencyModel::torus(Mat::Identity(2, 2));
  return fm;
}

}  // namespace

TEST_CASE("order-free and order-j predicates") {
  const auto& fm = torus2();
  const auto p = NekhoroshevParams::with_defaults(2, 0.3, 0.5, 10.0);
  IVec k(2);
  k << 0, 1;
  Vec a(2);
  a << 20.0, 0.0;  // ω = 2a ⟂ k
  CHECK(is_resonant(a, k, p, fm));
  CHECK(is_resonant_order(a, k, 1, p, fm));
  a << 5.0, 0.0;  // below R
  CHECK_FALSE(is_resonant(a, k, p, fm));
  CHECK_FALSE(is_resonant_order(a, k, 1, p, fm));
  a << 20.0, 20.0;  // |ω·k| = 40 > |a|^δ
  CHECK_FALSE(is_resonant(a, k, p, fm));
  k << 0, 5;  // too long for |a|^μ
  a << 20.0, 0.0;
  CHECK_FALSE(is_resonant(a, k, p, fm));
  CHECK_THROWS_AS(is_resonant_order(a, k, 3, p, fm), Error);
}

TEST_CASE("integer ball") {
  const auto b = integer_ball(2, 2.0);
  CHECK(b.size() == 12);  // 4 + 4 + 4
  for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i - 1].squaredNorm() <= b[i].squaredNorm());
  CHECK(integer_ball(3, 0.5).empty());
}

TEST_CASE("collect_modules matches brute force on Z^2 ∩ B_50") {
  const auto& fm = torus2();
  const auto p = NekhoroshevParams::with_defaults(2, 0.3, 0.5, 10.0);
  const auto lat = Lattice::build(2, Vec::Zero(2), Cone::full_space(), 50.0);
  const ResonanceTester t(p, fm);
  std::set<std::string> brute;
  const auto ball = integer_ball(2, t.k_bound(50.0) + 1e-9);
  for (std::size_t id = 0; id < lat.size(); ++id) {
    const Vec a = lat.point(id);
    for (const auto& k : ball) {
      if (!lat.find_shifted(id, k)) continue;
      if (t.resonant_order(a, k, 1) || t.resonant_order(a + to_real(k), k, 1))
        brute.insert(ResonanceModule::saturate(2, {k}).key());
    }
  }
  std::set<std::string> got;
  for (const auto& M : collect_modules(lat, p, fm, 1)) got.insert(M.key());
  CHECK(!brute.empty());
  CHECK(got == brute);
}

TEST_CASE("analysis zones agree with the direct witness search") {
  const auto& fm = torus2();
  const auto p = NekhoroshevParams::with_defaults(2, 0.3, 0.5, 10.0);
  const auto lat = Lattice::build(2, Vec::Zero(2), Cone::full_space(), 30.0);
  const ResonanceAnalysis an(lat, p, fm);
  REQUIRE(!an.modules().empty());
  std::size_t checked = 0, disagreements = 0;
  for (std::size_t m = 0; m < an.modules().size(); ++m)
    for (std::size_t id = 0; id < lat.size(); ++id) {
      const bool direct = resonant_zone_membership(id, an.modules()[m], lat, p, fm).has_value();
      ++checked;
      if (direct != an.in_zone(id, m)) ++disagreements;
    }
  CHECK(checked > 0);
  CHECK(disagreements == 0);
}

TEST_CASE("covering and witnesses") {
  const auto& fm = torus2();
  const auto p = NekhoroshevParams::with_defaults(2, 0.3, 0.5, 10.0);
  const auto lat = Lattice::build(2, Vec::Zero(2), Cone::full_space(), 40.0);
  const ResonanceAnalysis an(lat, p, fm);
  const ResonanceTester& t = an.tester();
  for (std::size_t id = 0; id < lat.size(); ++id) {
    CHECK((an.in_omega(id) != !an.memberships(id).empty()));
    for (const auto& m : an.memberships(id)) {
      const auto& w = m.witness;
      REQUIRE(!w.vectors.empty());
      const Vec base = lat.point(id) + w.sigma * to_real(w.vectors[0]);
      CHECK(lat.find_shifted(id, w.vectors[0]).has_value());
      for (std::size_t j = 0; j < w.vectors.size(); ++j) {
        CHECK(t.resonant_order(base, w.vectors[j], static_cast<int>(j) + 1));
        CHECK(an.modules()[m.module].contains(w.vectors[j]));
      }
    }
  }
}

TEST_CASE("points well inside the infrared ball are nonresonant") {
  const auto& fm = torus2();
  const auto p = NekhoroshevParams::with_defaults(2, 0.3, 0.5, 40.0);
  const auto lat = Lattice::build(2, Vec::Zero(2), Cone::full_space(), 20.0);
  const ResonanceAnalysis an(lat, p, fm);
  CHECK(an.omega_points().size() == lat.size());
  CHECK(an.modules_of_rank(1).empty());
  CHECK(an.modules_of_rank(2).empty());
}

TEST_CASE("zone monotonicity in d = 3") {
  Mat W(3, 3);
  W << 2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0;
  const auto fm = FrequencyModel::lie(W);
  auto p = NekhoroshevParams::with_defaults(3, 0.35, 0.6, 4.0);
  const auto lat = Lattice::build(3, Vec::Zero(3), Cone::full_space(), 9.0);
  const ResonanceAnalysis an(lat, p, fm);
  std::size_t higher = 0;
  for (std::size_t id = 0; id < lat.size(); ++id)
    for (const auto& m : an.memberships(id)) {
      if (m.rank < 2) continue;
      ++higher;
      bool found = false;
      for (const auto& q : an.memberships(id))
        if (q.rank == m.rank - 1 && an.modules()[m.module].contains_module(an.modules()[q.module])) found = true;
      CHECK(found);
    }
  CHECK(higher > 0);
}

TEST_CASE("Giorgilli volume inequality") {
  const auto r = props::giorgilli_suite(10000, 17);
  INFO("instances " << r.instances << " max ratio " << r.max_ratio);
  CHECK(r.instances > 9000);
  CHECK(r.violations == 0);
  CHECK(r.max_ratio <= 1.0 + 1e-9);  // equality is attained for s = 1
}

TEST_CASE("incrementini fuzz") {
  // Premise constants C = D = 1, γ = 0.5, μ = 0.2, δ = 0.3. The conclusion is
  // expected with constants at most ten times the premises.
  const auto r = props::incrementini_suite(5000, 23, 1.0, 1.0, 0.5, 0.2, 0.3, 10.0);
  INFO("instances " << r.instances << " C+ " << r.max_C_ratio << " D+ " << r.max_D_ratio);
  MESSAGE("incrementini: " << r.instances << " instances, C+/C = " << r.max_C_ratio
                           << ", D+/D = " << r.max_D_ratio);
  CHECK(r.instances >= 1000);
  CHECK(r.max_C_ratio <= 10.0);
  CHECK(r.max_D_ratio <= 10.0);
}
