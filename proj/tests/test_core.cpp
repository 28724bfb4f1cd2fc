// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "nekho/actions.hpp"
#include "nekho/core.hpp"
#include "nekho/rng.hpp"
#include "nekho/steepness.hpp"

#include <set>

using namespace nekho;

namespace {

Vec v2(double x, double y) { return (Vec(2) << x, y).finished(); }

// Brute-force scan of the bounding box.
std::set<std::vector<std::int64_t>> brute(int d, const Vec& kappa, const Cone& cone, double N) {
  std::set<std::vector<std::int64_t>> out;
  const auto lim = static_cast<std::int64_t>(std::ceil(N)) + 1;
  std::vector<std::int64_t> n(static_cast<std::size_t>(d), -lim);
  while (true) {
    Vec a(d);
    for (int i = 0; i < d; ++i) a[i] = static_cast<double>(n[static_cast<std::size_t>(i)]) + kappa[i];
    if (a.norm() <= N && cone.contains(a)) out.insert(n);
    int i = 0;
    while (i < d && ++n[static_cast<std::size_t>(i)] > lim) n[static_cast<std::size_t>(i++)] = -lim;
    if (i == d) break;
  }
  return out;
}

}  // namespace

TEST_CASE("lattice enumeration matches a brute-force box scan") {
  struct Case {
    int d;
    Vec kappa;
    Cone cone;
    double N;
  };
  std::vector<Case> cases = {
      {2, Vec::Zero(2), Cone::full_space(), 50.0},
      {2, v2(0.25, 0.0), Cone::anharmonic_2d(), 37.5},
      {2, v2(0.5, 0.0), Cone::rotation_2d(), 41.0},
      {3, Vec::Zero(3), Cone::full_space(), 12.0},
      {1, Vec::Constant(1, 0.5), Cone::half_planes({Vec::Constant(1, 1.0)}), 20.0},
  };
  for (const auto& c : cases) {
    const auto lat = Lattice::build(c.d, c.kappa, c.cone, c.N);
    const auto ref = brute(c.d, c.kappa, c.cone, c.N);
    REQUIRE(lat.size() == ref.size());
    std::vector<std::int64_t> prev;
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const IVec n = lat.integer(i);
      std::vector<std::int64_t> key(n.data(), n.data() + n.size());
      CHECK(ref.count(key) == 1);
      if (i > 0) CHECK(prev < key);  // lexicographic ids
      prev = key;
      CHECK(lat.find(n).value() == i);
    }
  }
}

TEST_CASE("lattice guards") {
  CHECK_THROWS_AS(Lattice::build(2, Vec::Zero(2), Cone::full_space(), 300.0, 1000), Error);
  try {
    Lattice::build(2, Vec::Zero(2), Cone::full_space(), 300.0, 1000);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Resource);
  }
  CHECK_THROWS_AS(Lattice::build(2, Vec::Zero(3), Cone::full_space(), 5.0), Error);
  const auto lat = Lattice::build(2, Vec::Zero(2), Cone::full_space(), 3.0);
  IVec far(2);
  far << 10, 0;
  CHECK_FALSE(lat.find(far).has_value());
  IVec k(2);
  k << 1, 0;
  const auto origin = lat.find(IVec::Zero(2)).value();
  CHECK(lat.find_shifted(origin, k).has_value());
}

TEST_CASE("cone membership") {
  const auto an = Cone::anharmonic_2d();
  CHECK(an.contains(v2(1.0, -0.5)));
  CHECK(an.contains(v2(0.0, 2.0)));
  CHECK_FALSE(an.contains(v2(-0.1, 1.0)));
  CHECK_FALSE(an.contains(v2(1.0, -1.5)));
  const auto rot = Cone::rotation_2d();
  CHECK(rot.contains(v2(2.0, 1.0)));
  CHECK_FALSE(rot.contains(v2(1.0, 2.0)));
  CHECK(Cone::full_space().contains(v2(-3.0, -4.0)));
}

TEST_CASE("homogeneity of closed-form presets") {
  Mat G(2, 2);
  G << 2.0, 0.3, 0.3, 1.0;
  Mat W(3, 3);
  W << 2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0;
  std::vector<FrequencyModel> models = {FrequencyModel::quadratic(G), FrequencyModel::torus(G),
                                        FrequencyModel::lie(W)};
  for (const auto& fm : models) {
    auto gen = stream(5, "homogeneity", 0);
    std::normal_distribution<double> g;
    for (int n = 0; n < 200; ++n) {
      Vec a(fm.dim());
      for (int i = 0; i < fm.dim(); ++i) a[i] = g(gen);
      if (a.norm() < 0.25) continue;
      const double lam = 1.0 + 10.0 * std::abs(g(gen));
      const double lhs = fm.h0(lam * a), rhs = std::pow(lam, fm.degree()) * fm.h0(a);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
    }
  }
}

TEST_CASE("omega agrees with central differences") {
  Mat G(2, 2);
  G << 1.0, 0.2, 0.2, 3.0;
  struct M {
    FrequencyModel fm;
    Cone cone;
  };
  std::vector<M> ms = {{FrequencyModel::torus(Mat::Identity(2, 2)), Cone::full_space()},
                       {FrequencyModel::power(G, 3.0), Cone::full_space()},
                       {FrequencyModel::hyperbolic(), Cone::full_space()},
                       {anharmonic_frequency_model(3).model, Cone::anharmonic_2d()},
                       {anharmonic_frequency_model(2).model, Cone::anharmonic_2d()},
                       {rotation_frequency_model(RotationSurface::ellipsoid_like()).model, Cone::rotation_2d()}};
  for (const auto& m : ms) {
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const Vec a = sample_annulus(m.cone, 2, 5.0, 11, static_cast<std::uint64_t>(n));
      const double h = 1e-5 * a.norm();
      const Vec w = m.fm.omega(a);
      Vec fd(2);
      for (int i = 0; i < 2; ++i) {
        Vec e = Vec::Zero(2);
        e[i] = h;
        fd[i] = (m.fm.h0(a + e) - m.fm.h0(a - e)) / (2.0 * h);
      }
      worst = std::max(worst, (fd - w).norm() / std::max(w.norm(), 1e-300));
    }
    INFO(m.fm.name());
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("parameter validation") {
  const auto fm = FrequencyModel::torus(Mat::Identity(2, 2));
  auto p = NekhoroshevParams::with_defaults(2, 0.1, 0.5, 10.0);
  auto rep = validate_params(p, fm);
  CHECK(rep.ok());
  REQUIRE(rep.gammas.size() == 2);
  CHECK(rep.gammas[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.gammas[1] == doctest::Approx(0.4).epsilon(1e-15));

  p.mu = 0.3;  // α d (d−1) μ = 0.6 >= M − δ
  rep = validate_params(p, fm);
  CHECK_FALSE(rep.ok());
  CHECK_FALSE(rep.find("steepness_link")->passed);

  p = NekhoroshevParams::with_defaults(2, 0.1, 1.0, 10.0);
  rep = validate_params(p, fm);
  CHECK_FALSE(rep.find("delta_range")->passed);
  CHECK(rep.find("delta_range")->detail.find("δ < M required") != std::string::npos);

  p = NekhoroshevParams::with_defaults(2, 0.1, 0.5, 10.0);
  p.C = {1.0, 0.5};
  CHECK_FALSE(validate_params(p, fm).find("C_chain")->passed);
}

TEST_CASE("Sobolev norms") {
  const auto lat = Lattice::build(2, Vec::Zero(2), Cone::full_space(), 4.0);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(lat.size()));
  amps[0] = cplx(3.0, 0.0);
  amps[5] = cplx(0.0, 4.0);
  const StateVector psi(lat, amps);
  CHECK(sobolev_norm(psi, 0.0) == doctest::Approx(5.0).epsilon(1e-15));
  const double w0 = 1.0 + lat.norm(0) * lat.norm(0), w5 = 1.0 + lat.norm(5) * lat.norm(5);
  CHECK(sobolev_norm(psi, 1.0) == doctest::Approx(std::sqrt(9.0 * w0 + 16.0 * w5)).epsilon(1e-14));
}

TEST_CASE("counter-based streams are reproducible") {
  auto a = stream(42, "m", 7), b = stream(42, "m", 7), c = stream(42, "m", 8);
  const auto x = a(), y = b(), z = c();
  CHECK(x == y);
  CHECK(x != z);
  CHECK(hash_uniform(1, 2, 3) == hash_uniform(1, 2, 3));
  CHECK(hash_uniform(1, 2, 3) != hash_uniform(1, 3, 2));
  for (int i = 0; i < 1000; ++i) {
    const double u = hash_uniform(9, static_cast<std::uint64_t>(i), 1);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
