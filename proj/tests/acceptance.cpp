// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. One line per criterion:
//   PASS|FAIL <id> <name>: <measured values>
// Exit status is the number of failed criteria.

#include "nekho/actions.hpp"
#include "nekho/config.hpp"
#include "nekho/evolution.hpp"
#include "nekho/experiments.hpp"
#include "nekho/normalform.hpp"
#include "nekho/rng.hpp"
#include "nekho/steepness.hpp"
#include "property_suites.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

using namespace nekho;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs a check, turning an exception into a failed line.
void criterion(int id, const std::string& name, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream d;
  d.precision(4);
  bool pass = false;
  try {
    pass = body(d);
  } catch (const std::exception& e) {
    d << "exception: " << e.what();
  }
  report(id, name, pass, d.str());
}

ExperimentConfig preset(const std::string& name, const std::string& command, const std::string& out) {
  auto c = config_from_json(preset_config(name));
  c.command = command;
  c.out = out;
  fs::remove_all(out);
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

bool same_tree(const std::string& a, const std::string& b, std::size_t& files) {
  files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto other = fs::path(b) / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
    ++files;
  }
  for (const auto& e : fs::directory_iterator(b))
    if (!fs::exists(fs::path(a) / e.path().filename())) return false;
  return files > 0;
}

}  // namespace

int main() {
  // Torus on the radius-200 ball with the calibrated parameters.
  Json verify_summary;
  double verify_seconds = 0.0;
  criterion(1, "calibrated torus partition", [&](std::ostringstream& d) {
    const auto c = preset("torus", "verify", "acc_verify");
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_command(c);
    verify_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    verify_summary = r.summary;
    const auto& p = r.summary["partition"];
    const bool exact = p["exact_partition"].get<bool>();
    const auto viol = r.summary["invariance"]["violations"].get<std::size_t>();
    const double ratio = p["dyadic"]["max_ratio"].get<double>();
    d << "N=" << c.lattice.N << " exact=" << exact << " violations=" << viol << " max_dyadic_ratio=" << ratio
      << " runtime=" << verify_seconds << "s";
    return exact && viol == 0 && ratio <= 2.0 && verify_seconds <= 300.0;
  });

  criterion(2, "complete-resonance zone empty", [&](std::ostringstream& d) {
    if (verify_summary.is_null()) throw std::runtime_error("verify did not run");
    const auto zd = verify_summary["partition"]["zone_d_points"].get<std::size_t>();
    d << "zone_d_points=" << zd;
    return zd == 0;
  });

  criterion(3, "counterexample closed form", [&](std::ostringstream& d) {
    const double eps = 0.5;
    double dev = 0.0;
    for (double et = 0.0; et <= 60.0 + 1e-12; et += 0.5) {
      const double t = et / eps;
      dev = std::max(dev, std::abs(counterexample_exact(eps, 1, t, counterexample_truncation(eps, t)).sobolev(0.0) - 1.0));
    }
    bool ok = dev <= 1e-10;
    d << "max|L2-1|=" << dev;
    for (double s : {1.0, 2.0}) {
      std::vector<double> x, y;
      for (double et = 10.0; et <= 50.0 + 1e-12; et += 1.0) {
        const double t = et / eps;
        x.push_back(et);
        y.push_back(counterexample_exact(eps, 1, t, counterexample_truncation(eps, t)).sobolev(s));
      }
      const auto f = fit_power_law(x, y);
      d << " slope(s=" << s << ")=" << f.slope;
      ok = ok && std::abs(f.slope - s) <= 0.15;
    }
    return ok;
  });

  criterion(4, "counterexample numerics vs closed form", [&](std::ostringstream& d) {
    const double eps = 0.5;
    std::vector<double> times;
    for (int i = 0; i <= 20; ++i) times.push_back(0.5 * i);  // εt <= 5
    const auto run = counterexample_evolve(eps, 1, times, counterexample_truncation(eps, times.back()), 1e-3);
    double worst = 0.0;
    for (double e : run.rel_l2_error) worst = std::max(worst, e);
    d << "max_rel_l2_error=" << worst;
    return worst <= 1e-6;
  });

  Json evolve_summary;
  criterion(5, "static normal forms stay dyadically bounded", [&](std::ostringstream& d) {
    auto c = preset("torus-evolve", "evolve", "acc_evolve");
    c.options["evolve"]["instances"] = 20;
    c.options["evolve"]["t_max"] = 1e4;
    c.options["evolve"]["remainder_order"] = -2.0;
    c.options["evolve"]["remainder_t_max"] = 1e3;
    evolve_summary = run_command(c).summary;
    bool ok = evolve_summary["normal_form"]["instances"] == 20;
    for (const auto& b : evolve_summary["normal_form"]["bounded"]) {
      const double s = b["s"].get<double>();
      if (s != 1.0 && s != 2.0) continue;
      const double ratio = b["sup_ratio"].get<double>();
      d << "sup_ratio(s=" << s << ")=" << ratio << " bound=" << std::pow(2.0, 2.0 * s) << " ";
      ok = ok && ratio <= std::pow(2.0, 2.0 * s);
    }
    return ok;
  });

  criterion(6, "order -2 remainder growth", [&](std::ostringstream& d) {
    if (evolve_summary.is_null()) throw std::runtime_error("evolve did not run");
    const auto& r = evolve_summary["remainder"];
    const double g = r["max_growth_exponent"].get<double>();
    d << "growth_exponent=" << g << " t_max=" << r["t_max"].get<double>() << " order=" << r["order"].get<double>();
    return g <= 1.05 && r["t_max"].get<double>() >= 1e3;
  });

  criterion(7, "action oracles", [&](std::ostringstream& d) {
    auto gen = stream(11, "acceptance-actions", 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double harm = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double E = 0.1 + 20.0 * u(gen);
      double L = (2.0 * u(gen) - 1.0) * 0.98 * anharmonic_L_max(E, 1);
      if (L == 0.0) L = 1e-3;
      harm = std::max(harm, std::abs(anharmonic_radial_action(E, L, 1) - 0.5 * (E - std::abs(L))));
    }
    double sph = 0.0;
    const auto sphere = RotationSurface::sphere();
    for (double E : {0.2, 0.7, 1.5, 4.0})
      for (double p : {-0.5, -0.1, 0.15, 0.45}) sph = std::max(sph, std::abs(rotation_a1(E, p, sphere) - std::sqrt(2.0 * E)));
    double rt = 0.0, qh = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const int ell = 1 + i % 3;
      const double E = 0.2 + 5.0 * u(gen);
      const double L = (2.0 * u(gen) - 1.0) * 0.95 * anharmonic_L_max(E, ell);
      if (L == 0.0) continue;
      const double a1 = anharmonic_a1(E, L, ell);
      rt = std::max(rt, std::abs(anharmonic_h0_from_actions(a1, L, ell) - E));
      const double lam = 0.25 + 4.0 * u(gen);
      const double lhs = anharmonic_a1(std::pow(lam, 2.0 * ell / (ell + 1.0)) * E, lam * L, ell);
      qh = std::max(qh, std::abs(lhs - lam * a1) / (lam * a1));
    }
    const auto ell_s = RotationSurface::ellipsoid_like();
    for (double E : {0.5, 1.0, 3.0})
      for (double p : {-0.6, 0.1, 0.3}) rt = std::max(rt, std::abs(rotation_h0_from_actions(rotation_a1(E, p, ell_s), p, ell_s) - E));
    d << "harmonic=" << harm << " sphere=" << sph << " roundtrip=" << rt << " quasihomogeneity=" << qh;
    return harm <= 1e-8 && sph <= 1e-6 && rt <= 1e-8 && qh <= 1e-6;
  });

  criterion(8, "steepness oracles", [&](std::ostringstream& d) {
    const auto torus = FrequencyModel::torus(Mat::Identity(2, 2));
    double arn = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const Vec a = sample_annulus(Cone::full_space(), 2, 3.0, 5, i);
      arn = std::max(arn, std::abs(arnold_determinant(torus, a) + 8.0 * a.squaredNorm()));
    }
    const auto b = taylor_betas(RotationSurface::sphere());
    const double bdev = std::max({std::abs(b[0] - 0.5), std::abs(b[1] - 1.0), std::abs(b[2]), std::abs(b[3] - 8.0)});
    const double rc = rotation_condition_value(b[0], b[1], b[2], b[3]);
    SteepnessOptions opt;
    opt.samples = 500;
    const auto good = sample_steepness(torus, Cone::full_space(), {1.0}, {1.0}, opt, 17);
    const auto hyp = sample_steepness(FrequencyModel::hyperbolic(), Cone::full_space(), {1.0}, {1.0}, opt, 17);
    d << "arnold_dev=" << arn << " betas_dev=" << bdev << " rotation_condition=" << rc
      << " torus_pass=" << good.pass << " hyperbolic_pass=" << hyp.pass << " witnesses=" << hyp.witnesses.size();
    return arn <= 1e-10 && bdev <= 1e-6 && std::abs(rc + 0.5) <= 1e-6 && good.pass && !hyp.pass &&
           !hyp.witnesses.empty();
  });

  criterion(9, "operator splitting and cohomological equation", [&](std::ostringstream& d) {
    const auto split = run_command(preset("torus-nf", "nf-split", "acc_nf_split")).summary;
    auto sc = preset("torus-nf", "nf-solve", "acc_nf_solve");
    const auto solve = run_command(sc).summary;
    const auto fm = make_model(sc.model, sc.lattice.d);
    const double rho = sc.params.rho_value(fm.mom());
    const double mF = solve["orders"]["F"]["m"].get<double>();
    const double mr = solve["orders"]["residual"]["m"].get<double>();
    const double r2 = solve["orders"]["residual"]["r2"].get<double>();
    const double thr = mF - (2.0 * rho + sc.params.delta - fm.degree()) + 0.2;
    const double idd = split["identity_defect"].get<double>();
    const auto mask = split["mask_violations"].get<std::size_t>();
    d << "identity_defect=" << idd << " mask_violations=" << mask << " residual_order=" << mr
      << " threshold=" << thr << " r2=" << r2;
    return idd <= 1e-12 && mask == 0 && mr <= thr && r2 >= 0.9;
  });

  criterion(10, "lattice geometry property suites", [&](std::ostringstream& d) {
    const auto g = props::giorgilli_suite(10000, 2024);
    const auto p = props::projector_suite(10000, 2025);
    d << "giorgilli " << g.violations << "/" << g.instances << " (max ratio " << g.max_ratio << "), projector "
      << p.violations << "/" << p.instances << " (max ratio " << p.max_ratio << ")";
    return g.instances == 10000 && p.instances == 10000 && g.violations == 0 && p.violations == 0;
  });

  criterion(11, "deterministic artifacts", [&](std::ostringstream& d) {
    bool ok = true;
    std::size_t total = 0;
    auto twice = [&](ExperimentConfig c) {
      const std::string a = c.out + "_a", b = c.out + "_b";
      fs::remove_all(a);
      fs::remove_all(b);
      c.out = a;
      run_command(c);
      c.out = b;
      run_command(c);
      std::size_t files = 0;
      const bool same = same_tree(a, b, files);
      d << c.command << (same ? "=same " : "=DIFFERENT ");
      total += files;
      ok = ok && same;
    };
    auto part = preset("torus", "partition", "acc_det_partition");
    part.lattice.N = 100.0;
    twice(part);
    auto ev = preset("torus-evolve", "evolve", "acc_det_evolve");
    ev.options["evolve"] = {{"instances", 3}, {"t_max", 100.0}, {"time_points", 5}, {"remainder_t_max", 20.0}};
    twice(ev);
    auto ce = preset("counterexample", "counterexample", "acc_det_cex");
    ce.options["counterexample"] = {{"t_max", 20.0}, {"numeric_t_max", 2.0}};
    twice(ce);
    twice(preset("torus", "steep", "acc_det_steep"));
    d << "files=" << total;
    return ok;
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
