// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "nekho/steepness.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <functional>

using namespace nekho;

namespace {

// Bordered Hessian determinant by central differences.
double numeric_arnold(const std::function<double(double, double)>& h, double x, double y) {
  const double e = 1e-4;
  auto f = [&](double dx, double dy) { return h(x + dx, y + dy); };
  const double hx = (f(e, 0) - f(-e, 0)) / (2 * e), hy = (f(0, e) - f(0, -e)) / (2 * e);
  const double hxx = (f(e, 0) - 2 * f(0, 0) + f(-e, 0)) / (e * e);
  const double hyy = (f(0, e) - 2 * f(0, 0) + f(0, -e)) / (e * e);
  const double hxy = (f(e, e) - f(e, -e) - f(-e, e) + f(-e, -e)) / (4 * e * e);
  Eigen::Matrix3d B;
  B << hxx, hxy, hx, hxy, hyy, hy, hx, hy, 0.0;
  return B.determinant();
}

}  // namespace

TEST_CASE("Arnold determinant of |a|^2") {
  const auto fm = FrequencyModel::torus(Mat::Identity(2, 2));
  for (double th = 0.0; th < 6.28; th += 0.37)
    for (double r : {0.5, 1.0, 7.0}) {
      Vec a(2);
      a << r * std::cos(th), r * std::sin(th);
      CHECK(arnold_determinant(fm, a) == doctest::Approx(-8.0 * r * r).epsilon(1e-12));
    }
}

TEST_CASE("Arnold determinant expansion agrees with the numeric bordered Hessian") {
  struct C {
    double a0, a1, a2, deg;
  };
  for (const auto& c : {C{1.0, 0.3, 2.0, 2.0}, C{0.7, -1.1, 0.4, 3.0}, C{2.0, 0.0, -1.0, 4.0}}) {
    // only the terms up to x^2 contribute at x = 0
    auto h = [&](double x, double y) {
      return c.a0 * std::pow(y, c.deg) + c.a1 * std::pow(y, c.deg - 1) * x +
             0.5 * c.a2 * std::pow(y, c.deg - 2) * x * x + 0.1 * x * x * x * std::pow(y, c.deg - 3);
    };
    for (double y : {0.8, 1.0, 1.7}) {
      const double num = numeric_arnold(h, 0.0, y);
      CHECK(arnold_determinant_expansion(c.a0, c.a1, c.a2, c.deg, y) ==
            doctest::Approx(num).epsilon(1e-5));
    }
  }
  CHECK(check_steep_fin(1.0, 0.3, 2.0, 2.0));
  CHECK_FALSE(check_steep_fin(1.0, 2.0, 2.0, 2.0));  // 𝚍α0α2 = (𝚍−1)α1²
  CHECK_FALSE(check_steep_fin(0.0, 1.0, 1.0, 2.0));
}

TEST_CASE("rotation condition on the round sphere") {
  CHECK(rotation_condition_value(0.5, 1.0, 0.0, 8.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(check_rotation_condition(0.5, 1.0, 0.0, 8.0));
  CHECK(std::isnan(rotation_condition_value(1.0, 0.0, 1.0, 1.0)));
  CHECK_FALSE(check_rotation_condition(1.0, 0.0, 1.0, 1.0));
}

TEST_CASE("Birkhoff coefficients against the action integral") {
  // H = p²/2 + A q²/2 + B q³/6 + C q⁴/24; ω(I) = c1 + 2 c2 I + O(I²).
  const double A = 1.3, B = 0.4, Cq = 0.9;
  const auto [c1, c2] = birkhoff_coefficients(A, B, Cq);
  CHECK(c1 == doctest::Approx(std::sqrt(A)).epsilon(1e-15));
  auto V = [&](double q) { return A * q * q / 2 + B * q * q * q / 6 + Cq * q * q * q * q / 24; };
  boost::math::quadrature::tanh_sinh<double> ts;
  auto action = [&](double E) {
    auto turn = [&](double lo, double hi) {
      boost::math::tools::eps_tolerance<double> tol(52);
      std::uintmax_t it = 200;
      auto r = boost::math::tools::toms748_solve([&](double q) { return V(q) - E; }, lo, hi, tol, it);
      return 0.5 * (r.first + r.second);
    };
    const double w = 4.0 * std::sqrt(E / A);
    const double qm = turn(-w, 0.0), qp = turn(0.0, w);
    return ts.integrate([&](double q) { return std::sqrt(std::max(0.0, 2.0 * (E - V(q)))); }, qm, qp) / M_PI;
  };
  std::vector<double> est;
  for (double E : {4e-3, 2e-3}) {
    const double h = 1e-4 * E;
    const double om = 2.0 * h / (action(E + h) - action(E - h));
    est.push_back((om - c1) / (2.0 * action(E)));
  }
  // Richardson in I ∝ E
  const double extrap = 2.0 * est[1] - est[0];
  CHECK(extrap == doctest::Approx(c2).epsilon(2e-3));
  CHECK_THROWS_AS(birkhoff_coefficients(-1.0, 0.0, 0.0), Error);
}

TEST_CASE("sampled steepness: quadratic passes, hyperbolic fails") {
  SteepnessOptions opt;
  opt.samples = 300;
  const auto torus = sample_steepness(FrequencyModel::torus(Mat::Identity(2, 2)), Cone::full_space(), {1.0},
                                      {1.0}, opt, 7);
  CHECK(torus.pass);
  REQUIRE(torus.fitted_B.size() == 1);
  CHECK(torus.fitted_B[0] >= 1.0);
  CHECK(torus.fitted_B[0] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(torus.witnesses.empty());

  const auto hyp = sample_steepness(FrequencyModel::hyperbolic(), Cone::full_space(), {1.0}, {1.0}, opt, 7);
  CHECK_FALSE(hyp.pass);
  CHECK_FALSE(hyp.witnesses.empty());
  for (const auto& w : hyp.witnesses) CHECK(w.value < w.bound);

  // same seed, same report
  const auto again = sample_steepness(FrequencyModel::torus(Mat::Identity(2, 2)), Cone::full_space(), {1.0},
                                      {1.0}, opt, 7);
  CHECK(again.fitted_B == torus.fitted_B);
}

TEST_CASE("isolated critical points on lines") {
  NiedermanOptions opt;
  opt.samples = 100;
  const auto q = niederman_check(FrequencyModel::torus(Mat::Identity(2, 2)), Cone::full_space(), opt, 3);
  CHECK(q.pass);
  Mat G(2, 2);
  G << 1.0, 0.0, 0.0, 0.0;  // x² is constant along every line orthogonal to ω
  const auto flat = niederman_check(FrequencyModel::quadratic(G), Cone::full_space(), opt, 3);
  CHECK_FALSE(flat.pass);
  CHECK_FALSE(flat.witnesses.empty());
}

TEST_CASE("annulus samples stay in the annulus and cone") {
  const auto cone = Cone::anharmonic_2d();
  for (std::uint64_t i = 0; i < 500; ++i) {
    const Vec a = sample_annulus(cone, 2, 3.0, 5, i);
    CHECK(a.norm() >= 1.5);
    CHECK(a.norm() <= 6.0);
    CHECK(cone.contains(a));
  }
  CHECK(sample_annulus(cone, 2, 3.0, 5, 9) == sample_annulus(cone, 2, 3.0, 5, 9));
}
