// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "nekho/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nekho;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small(const std::string& preset, const std::string& command, const std::string& out) {
  auto c = config_from_json(preset_config(preset));
  c.command = command;
  c.out = (fs::temp_directory_path() / ("nekho_test_" + out)).string();
  fs::remove_all(c.out);
  return c;
}

Json read_json(const std::string& dir, const std::string& name) {
  std::ifstream f(fs::path(dir) / name);
  REQUIRE(f.good());
  return Json::parse(f);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

ErrorCode code_of(const ExperimentConfig& c) {
  try {
    run_command(c);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("every documented command is dispatched") {
  const auto names = command_names();
  for (const char* n : {"lattice", "partition", "verify", "steep", "actions", "invert", "nf-split", "nf-solve",
                        "evolve", "counterexample", "calibrate"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  auto c = small("torus", "frobnicate", "unknown");
  CHECK(code_of(c) == ErrorCode::Config);
}

TEST_CASE("lattice, partition and verify on the calibrated torus") {
  auto c = small("torus", "verify", "verify");
  c.lattice.N = 120.0;
  const auto r = run_command(c);
  CHECK(r.exit_code == 0);
  const auto s = read_json(c.out, "verify.json");
  CHECK(s["pass"] == true);
  CHECK(s["invariance"]["violations"] == 0);
  CHECK(s["partition"]["exact_partition"] == true);
  CHECK(s["partition"]["zone_d_points"] == 0);
  CHECK(s["config_hash"] == hex64(config_hash(c)));
  auto returned = r.summary;
  returned.erase("artifacts");
  CHECK(returned == s);
  for (const auto& a : r.artifacts) CHECK(fs::exists(fs::path(c.out) / a));

  c.command = "partition";
  const auto p = run_command(c);
  CHECK(p.exit_code == 0);
  CHECK(fs::exists(fs::path(c.out) / "partition.csv"));
  CHECK(read_json(c.out, "partition.json")["partition"]["dyadic"]["ok"] == true);

  c.command = "lattice";
  CHECK(run_command(c).exit_code == 0);
  const auto l = read_json(c.out, "lattice.json");
  CHECK(l["covering_ok"] == true);
  CHECK(l["points"].get<std::size_t>() > 0);
}

TEST_CASE("the broken configuration reports violations") {
  auto c = small("broken", "verify", "broken");
  const auto r = run_command(c);
  CHECK(r.exit_code == 1);
  CHECK(r.summary["pass"] == false);
  CHECK(r.summary["invariance"]["violations"].get<std::size_t>() > 0);
  // the same parameters are rejected once validity is enforced
  c.require_valid_params = true;
  CHECK(code_of(c) == ErrorCode::Config);
}

TEST_CASE("invalid parameters are configuration errors") {
  auto c = small("torus", "verify", "invalid");
  c.params.delta = 1.5;
  CHECK(code_of(c) == ErrorCode::Config);
  CHECK_FALSE(fs::exists(fs::path(c.out) / "verify.json"));
}

TEST_CASE("steepness, actions and inversion") {
  auto c = small("torus", "steep", "steep");
  c.options["steep"] = {{"samples", 200}};
  auto r = run_command(c);
  CHECK(r.exit_code == 0);
  CHECK(r.summary["arnold_unit_circle"]["max"].get<double>() == doctest::Approx(-8.0).epsilon(1e-10));

  c = small("anharmonic", "actions", "actions");
  r = run_command(c);
  CHECK(r.exit_code == 0);
  CHECK(r.summary["max_roundtrip_error"].get<double>() <= 1e-8);
  CHECK(fs::exists(fs::path(c.out) / "actions.csv"));
  c.command = "invert";
  CHECK(run_command(c).exit_code == 0);
}

TEST_CASE("normal-form commands") {
  auto c = small("torus-nf", "nf-split", "nf");
  c.lattice.N = 40.0;
  auto r = run_command(c);
  CHECK(r.exit_code == 0);
  CHECK(r.summary["identity_defect"].get<double>() <= 1e-12);
  CHECK(r.summary["mask_violations"] == 0);
  CHECK(fs::exists(fs::path(c.out) / "F_res.csv"));
  c.command = "nf-solve";
  c.options["nf"]["write_operators"] = false;
  r = run_command(c);
  CHECK(r.summary["mask_violations"] == 0);
  CHECK(r.summary["orders"].contains("G"));
  CHECK_FALSE(fs::exists(fs::path(c.out) / "G.csv"));
}

TEST_CASE("evolution and the counterexample") {
  auto c = small("torus-evolve", "evolve", "evolve");
  c.options["evolve"] = {{"instances", 2}, {"t_max", 100.0}, {"time_points", 5},
                         {"remainder_t_max", 20.0}, {"remainder_points", 6}};
  auto r = run_command(c);
  CHECK(r.exit_code == 0);
  CHECK(r.summary["normal_form"]["instances"] == 2);
  CHECK(r.summary["remainder"]["pass"] == true);

  c = small("counterexample", "counterexample", "cex");
  c.options["counterexample"] = {{"t_max", 20.0}, {"time_points", 21}, {"numeric_t_max", 2.0}};
  r = run_command(c);
  CHECK(r.summary["max_l2_deviation"].get<double>() <= 1e-10);
  CHECK(r.summary["numeric"]["max_rel_l2_error"].get<double>() <= 1e-6);
  CHECK(fs::exists(fs::path(c.out) / "counterexample.csv"));
}

TEST_CASE("calibration finds a clean configuration") {
  auto c = small("torus", "calibrate", "calibrate");
  c.lattice.N = 120.0;
  c.params.R = 10.0;
  c.options["calibrate"] = {{"R_grid", {10.0, 20.0, 40.0, 80.0}}, {"max_doublings", 2}};
  const auto r = run_command(c);
  CHECK(r.exit_code == 0);
  CHECK(r.summary["found"] == true);
  const auto found = read_json(c.out, "calibrated.json");
  auto v = config_from_json(found);
  v.command = "verify";
  v.out = c.out + "_verify";
  CHECK(run_command(v).exit_code == 0);
  fs::remove_all(v.out);
}

TEST_CASE("the same seed reproduces artifacts byte for byte") {
  auto a = small("torus-evolve", "evolve", "det_a");
  a.options["evolve"] = {{"instances", 2}, {"t_max", 50.0}, {"time_points", 3}, {"remainder", false}};
  auto b = a;
  b.out = (fs::temp_directory_path() / "nekho_test_det_b").string();
  fs::remove_all(b.out);
  run_command(a);
  run_command(b);
  for (const auto& e : fs::directory_iterator(a.out)) {
    INFO(e.path().filename().string());
    CHECK(slurp(e.path()) == slurp(fs::path(b.out) / e.path().filename()));
  }
}
