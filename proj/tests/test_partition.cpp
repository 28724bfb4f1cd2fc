// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "property_suites.hpp"

#include "nekho/config.hpp"
#include "nekho/partition.hpp"

#include <random>
#include <set>

using namespace nekho;

namespace {

struct Setup {
  ExperimentConfig cfg;
  Lattice lat;
  FrequencyModel fm;
};

Setup setup(const std::string& preset, double N = -1.0, double R = -1.0) {
  auto cfg = config_from_json(preset_config(preset));
  if (N > 0) cfg.lattice.N = N;
  if (R > 0) cfg.params.R = R;
  auto lat = make_lattice(cfg.lattice);
  auto fm = make_model(cfg.model, cfg.lattice.d);
  return {cfg, std::move(lat), std::move(fm)};
}

}  // namespace

TEST_CASE("disjoint sets") {
  DisjointSets ds(6);
  ds.unite(0, 1);
  ds.unite(2, 3);
  ds.unite(1, 3);
  CHECK(ds.find(0) == ds.find(2));
  CHECK(ds.find(4) != ds.find(0));
  CHECK(ds.find(5) == 5);
}

TEST_CASE("coupling is symmetric") {
  const auto fm = FrequencyModel::torus(Mat::Identity(2, 2));
  const auto p = NekhoroshevParams::with_defaults(2, 0.3, 0.5, 10.0);
  const ResonanceTester t(p, fm);
  auto gen = stream(4, "coupling", 0);
  std::uniform_int_distribution<int> c(-60, 60), s(-4, 4);
  int coupled_pairs = 0;
  for (int n = 0; n < 20000; ++n) {
    Vec a(2), b(2);
    a << c(gen), c(gen);
    b << a[0] + s(gen), a[1] + s(gen);
    const bool ab = coupled(t, a, b), ba = coupled(t, b, a);
    CHECK(ab == ba);
    coupled_pairs += ab;
  }
  CHECK(coupled_pairs > 0);
}

TEST_CASE("equivalence classes partition a zone and are separated") {
  auto S = setup("torus", 80.0, 20.0);
  const ResonanceAnalysis an(S.lat, S.cfg.params, S.fm);
  std::size_t zones = 0;
  for (auto m : an.modules_of_rank(1)) {
    const auto& zone = an.zone(m);
    const auto& M = an.modules()[m];
    const auto cls = equivalence_classes(S.lat, zone, M, S.cfg.params.mu);
    std::set<std::size_t> seen;
    std::vector<std::size_t> label(S.lat.size(), kNoModule);
    for (std::size_t c = 0; c < cls.size(); ++c) {
      CHECK(cls[c].j == c);
      for (auto id : cls[c].members) {
        CHECK(seen.insert(id).second);
        label[id] = c;
      }
    }
    CHECK(seen.size() == zone.size());
    // ~' never links two different classes
    for (auto a : zone)
      for (auto b : zone) {
        if (label[a] == label[b]) continue;
        const IVec diff = S.lat.integer(a) - S.lat.integer(b);
        const double dn = to_real(diff).norm();
        const bool close = dn <= std::max(std::pow(S.lat.norm(a), S.cfg.params.mu),
                                          std::pow(S.lat.norm(b), S.cfg.params.mu));
        CHECK_FALSE((M.contains(diff) && close));
      }
    if (++zones == 4) break;
  }
  CHECK(zones > 0);
}

TEST_CASE("calibrated torus configuration is an exact invariant partition") {
  auto S = setup("torus");
  const ResonanceAnalysis an(S.lat, S.cfg.params, S.fm);
  const BlockPartition part(an);
  const auto st = part.stats();
  CHECK(st.interior_points > 0);
  CHECK(st.uncovered == 0);
  CHECK(st.conflicts == 0);
  CHECK(st.zone_d_points == 0);
  const auto inv = verify_invariance(part);
  CHECK(inv.pairs_checked > 0);
  CHECK(inv.violations.empty());
  const auto dy = verify_dyadic_and_diameter(part);
  CHECK(dy.ok);
  CHECK(dy.max_ratio <= 2.0);
  // every nonresonant interior point sits in its own singleton block
  for (std::size_t id = 0; id < S.lat.size(); ++id) {
    if (!an.interior_safe(id) || !an.in_omega(id)) continue;
    REQUIRE(part.e_labels(id).size() == 1);
    const auto& b = part.e_blocks()[part.e_labels(id)[0]];
    CHECK(b.s == 0);
    CHECK(b.members.size() == 1);
  }
}

TEST_CASE("broken configuration produces invariance violations") {
  auto S = setup("broken");
  const ResonanceAnalysis an(S.lat, S.cfg.params, S.fm);
  const BlockPartition part(an);
  const auto inv = verify_invariance(part);
  CHECK(inv.violations.size() > 0);
  for (const auto& v : inv.violations) {
    CHECK(coupled(an.tester(), S.lat.point(v.a), S.lat.point(v.b)));
    CHECK(S.lat.integer(v.b) - S.lat.integer(v.a) == v.k);
  }
  CHECK(part.stats().zone_d_points > 0);
  CHECK_FALSE(verify_dyadic_and_diameter(part).ok);
}

TEST_CASE("diameter constants stay bounded as R grows") {
  std::vector<double> c1;
  for (double R : {20.0, 40.0, 80.0}) {
    auto S = setup("torus", 200.0, R);
    const ResonanceAnalysis an(S.lat, S.cfg.params, S.fm);
    const BlockPartition part(an);
    const auto dy = verify_dyadic_and_diameter(part);
    REQUIRE(dy.diameter_constant.size() >= 2);
    MESSAGE("R = " << R << ": diameter constant (s = 1) " << dy.diameter_constant[1]);
    CHECK(std::isfinite(dy.diameter_constant[1]));
    c1.push_back(dy.diameter_constant[1]);
  }
  CHECK(c1[1] <= 2.0 * c1[0]);
  CHECK(c1[2] <= 2.0 * c1[0]);
}

TEST_CASE("projector perturbation inequality") {
  const auto r = props::projector_suite(10000, 29);
  INFO("instances " << r.instances << " max ratio " << r.max_ratio);
  CHECK(r.instances == 10000);
  CHECK(r.violations == 0);
}
