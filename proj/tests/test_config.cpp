// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "nekho/config.hpp"

#include <cstdio>
#include <fstream>

using namespace nekho;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("presets round-trip bit-exactly") {
  for (const auto& name : preset_names()) {
    INFO(name);
    const auto c1 = config_from_json(preset_config(name));
    const auto j1 = config_to_json(c1);
    const auto j2 = config_to_json(config_from_json(j1));
    CHECK(j1.dump() == j2.dump());
    CHECK(config_hash(c1) == config_hash(config_from_json(j1)));
    // every preset builds its lattice and model
    CHECK_NOTHROW(make_lattice(c1.lattice));
    CHECK_NOTHROW(make_model(c1.model, c1.lattice.d));
  }
  CHECK(code_of([] { preset_config("nope"); }) == ErrorCode::Config);
}

TEST_CASE("doubles survive serialization") {
  auto c = config_from_json(preset_config("torus"));
  c.params.mu = 0.1 + 0.2;  // not representable as a short decimal
  c.params.rho = 1.0 / 3.0;
  const auto back = config_from_json(Json::parse(config_to_json(c).dump()));
  CHECK(back.params.mu == c.params.mu);
  CHECK(*back.params.rho == *c.params.rho);
}

TEST_CASE("hash ignores output location and threads only") {
  auto c = config_from_json(preset_config("torus"));
  const auto h = config_hash(c);
  c.out = "elsewhere";
  c.threads = 7;
  CHECK(config_hash(c) == h);
  c.seed = 2;
  CHECK(config_hash(c) != h);
  CHECK(hex64(0x1234) == "0000000000001234");
}

TEST_CASE("overrides") {
  Json j = preset_config("torus");
  apply_override(j, "params.mu=0.25");
  apply_override(j, "model.preset=lie");  // bare string
  apply_override(j, "options.evolve.t_max=5");
  apply_override(j, "params.Cs=[1,3]");
  const auto c = config_from_json(j);
  CHECK(c.params.mu == 0.25);
  CHECK(c.model.preset == "lie");
  CHECK(option<double>(c, "evolve", "t_max", 0.0) == 5.0);
  CHECK(option<double>(c, "evolve", "missing", 9.0) == 9.0);
  CHECK(c.params.C == std::vector<double>{1.0, 3.0});
  CHECK(code_of([&] { apply_override(j, "novalue"); }) == ErrorCode::Config);
  CHECK(code_of([&] { apply_override(j, "=3"); }) == ErrorCode::Config);
  CHECK(code_of([&] { apply_override(j, "seed.x=3"); }) == ErrorCode::Config);
}

TEST_CASE("malformed configurations are configuration errors") {
  Json j = preset_config("torus");
  j["lattice"]["N"] = "large";
  CHECK(code_of([&] { config_from_json(j); }) == ErrorCode::Config);
  CHECK(code_of([] { config_from_json(Json::array()); }) == ErrorCode::Config);
  auto c = config_from_json(preset_config("torus"));
  c.lattice.cone = "wedge";
  CHECK(code_of([&] { make_cone(c.lattice); }) == ErrorCode::Config);
  c.model.preset = "torus";
  c.model.coefficients = {1.0, 2.0, 3.0};
  CHECK(code_of([&] { make_model(c.model, 2); }) == ErrorCode::Config);
  c.model.preset = "rotation";
  c.model.surface = "torus";
  CHECK(code_of([&] { make_model(c.model, 2); }) == ErrorCode::Config);
  Json o = preset_config("torus");
  o["options"]["evolve"] = {{"t_max", "soon"}};
  const auto co = config_from_json(o);
  CHECK(code_of([&] { option<double>(co, "evolve", "t_max", 1.0); }) == ErrorCode::Config);
}

TEST_CASE("loading from disk") {
  const std::string path = "test_config_tmp.json";
  {
    std::ofstream f(path);
    f << preset_config("broken").dump(2);
  }
  const auto c = load_config(path);
  CHECK(c.params.C == std::vector<double>{1.0, 0.5});
  CHECK_FALSE(c.require_valid_params);
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  CHECK(code_of([&] { load_config(path); }) == ErrorCode::Config);
  std::remove(path.c_str());
  CHECK(code_of([&] { load_config(path); }) == ErrorCode::Config);
}
