// SPDX-License-Identifier: Apache-2.0
#include "nekho/config.hpp"

#include "nekho/actions.hpp"
#include "nekho/rng.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nekho {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::Config, what); }

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(where + "." + key + ": " + e.what());
  }
}

Mat square_matrix(const std::vector<double>& c, int d, const std::string& what) {
  if (c.empty()) return Mat::Identity(d, d);
  if (c.size() != static_cast<std::size_t>(d * d))
    bad(what + " needs " + std::to_string(d * d) + " coefficients, got " + std::to_string(c.size()));
  Mat G(d, d);
  for (int r = 0; r < d; ++r)
    for (int q = 0; q < d; ++q) G(r, q) = c[static_cast<std::size_t>(r * d + q)];
  return G;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) bad("config root must be an object");
  ExperimentConfig c;
  c.command = get_or<std::string>(j, "command", "", "config");
  c.seed = get_or<std::uint64_t>(j, "seed", 1, "config");
  c.out = get_or<std::string>(j, "out", "out", "config");
  c.threads = get_or<int>(j, "threads", 1, "config");
  c.require_valid_params = get_or<bool>(j, "require_valid_params", true, "config");
  if (c.threads < 1) bad("threads must be >= 1");

  const Json lat = j.value("lattice", Json::object());
  c.lattice.d = get_or<int>(lat, "d", 2, "lattice");
  if (c.lattice.d < 1 || c.lattice.d > 6) bad("lattice.d must be in [1, 6]");
  c.lattice.kappa = get_or<std::vector<double>>(lat, "kappa", {}, "lattice");
  if (!c.lattice.kappa.empty() && c.lattice.kappa.size() != static_cast<std::size_t>(c.lattice.d))
    bad("lattice.kappa must have d entries");
  c.lattice.cone = get_or<std::string>(lat, "cone", "full", "lattice");
  c.lattice.normals = get_or<std::vector<std::vector<double>>>(lat, "normals", {}, "lattice");
  c.lattice.N = get_or<double>(lat, "N", 50.0, "lattice");
  c.lattice.max_points = get_or<std::size_t>(lat, "max_points", Lattice::kDefaultMaxPoints, "lattice");
  if (!(c.lattice.N > 0.0)) bad("lattice.N must be positive");

  const Json par = j.value("params", Json::object());
  const int d = c.lattice.d;
  c.params = NekhoroshevParams::with_defaults(d, get_or<double>(par, "mu", 0.1, "params"),
                                              get_or<double>(par, "delta", 0.5, "params"),
                                              get_or<double>(par, "R", 10.0, "params"));
  c.params.alphas = get_or<std::vector<double>>(par, "alphas", c.params.alphas, "params");
  c.params.C = get_or<std::vector<double>>(par, "Cs", c.params.C, "params");
  c.params.D = get_or<std::vector<double>>(par, "Ds", c.params.D, "params");
  c.params.tb = get_or<double>(par, "tb", 0.0, "params");
  if (par.contains("rho") && !par["rho"].is_null()) c.params.rho = get_or<double>(par, "rho", 0.0, "params");
  if (c.params.C.size() != static_cast<std::size_t>(d) || c.params.D.size() != static_cast<std::size_t>(d))
    bad("params.Cs and params.Ds need d entries");
  if (c.params.alphas.size() != static_cast<std::size_t>(std::max(0, d - 1)))
    bad("params.alphas needs d-1 entries");

  const Json mod = j.value("model", Json::object());
  c.model.preset = get_or<std::string>(mod, "preset", "torus", "model");
  c.model.coefficients = get_or<std::vector<double>>(mod, "coefficients", {}, "model");
  c.model.degree = get_or<double>(mod, "degree", 2.0, "model");
  c.model.ell = get_or<int>(mod, "ell", 1, "model");
  c.model.surface = get_or<std::string>(mod, "surface", "sphere", "model");
  c.model.nodes = get_or<int>(mod, "nodes", 48, "model");

  c.options = j.value("options", Json::object());
  if (!c.options.is_object()) bad("options must be an object");
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["threads"] = c.threads;
  j["require_valid_params"] = c.require_valid_params;
  j["lattice"] = {{"d", c.lattice.d},         {"kappa", c.lattice.kappa},
                  {"cone", c.lattice.cone},   {"normals", c.lattice.normals},
                  {"N", c.lattice.N},         {"max_points", c.lattice.max_points}};
  j["params"] = {{"mu", c.params.mu}, {"delta", c.params.delta}, {"alphas", c.params.alphas},
                 {"Cs", c.params.C},  {"Ds", c.params.D},         {"R", c.params.R},
                 {"tb", c.params.tb}};
  j["params"]["rho"] = c.params.rho ? Json(*c.params.rho) : Json(nullptr);
  j["model"] = {{"preset", c.model.preset}, {"coefficients", c.model.coefficients},
                {"degree", c.model.degree}, {"ell", c.model.ell},
                {"surface", c.model.surface}, {"nodes", c.model.nodes}};
  j["options"] = c.options;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    bad(path + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) bad("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  Json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) bad("override path crosses a non-object: " + path);
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = Json::object();
  }
  if (!node->is_object()) bad("override path crosses a non-object: " + path);
  (*node)[parts.back()] = value;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  Json j = config_to_json(c);
  j.erase("out");
  j.erase("threads");
  return fnv1a(j.dump());
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Cone make_cone(const LatticeSpec& s) {
  if (s.cone == "full") return Cone::full_space();
  if (s.cone == "anharmonic") {
    if (s.d != 2) bad("anharmonic cone needs d = 2");
    return Cone::anharmonic_2d();
  }
  if (s.cone == "rotation") {
    if (s.d != 2) bad("rotation cone needs d = 2");
    return Cone::rotation_2d();
  }
  if (s.cone == "half_planes") {
    std::vector<Vec> normals;
    for (const auto& n : s.normals) {
      if (n.size() != static_cast<std::size_t>(s.d)) bad("cone normal has wrong dimension");
      normals.push_back(Eigen::Map<const Vec>(n.data(), s.d));
    }
    return Cone::half_planes(normals);
  }
  bad("unknown cone '" + s.cone + "'");
}

Lattice make_lattice(const LatticeSpec& s) {
  Vec kappa = s.kappa.empty() ? Vec::Zero(s.d) : Vec(Eigen::Map<const Vec>(s.kappa.data(), s.d));
  return Lattice::build(s.d, kappa, make_cone(s), s.N, s.max_points);
}

FrequencyModel make_model(const ModelSpec& m, int d) {
  if (m.preset == "torus") return FrequencyModel::torus(square_matrix(m.coefficients, d, "torus metric"));
  if (m.preset == "quadratic") return FrequencyModel::quadratic(square_matrix(m.coefficients, d, "quadratic form"));
  if (m.preset == "lie") return FrequencyModel::lie(square_matrix(m.coefficients, d, "weight Gram matrix"));
  if (m.preset == "power") return FrequencyModel::power(square_matrix(m.coefficients, d, "power form"), m.degree);
  if (m.preset == "hyperbolic") {
    if (d != 2) bad("hyperbolic model needs d = 2");
    return FrequencyModel::hyperbolic();
  }
  if (m.preset == "anharmonic") {
    if (d != 2) bad("anharmonic model needs d = 2");
    return anharmonic_frequency_model(m.ell, m.nodes).model;
  }
  if (m.preset == "rotation") {
    if (d != 2) bad("rotation model needs d = 2");
    RotationSurface s = m.surface == "sphere"      ? RotationSurface::sphere()
                        : m.surface == "ellipsoid" ? RotationSurface::ellipsoid_like()
                        : m.surface == "bumpy"     ? RotationSurface::bumpy()
                                                   : throw Error(ErrorCode::Config, "unknown surface " + m.surface);
    return rotation_frequency_model(s, m.nodes).model;
  }
  bad("unknown model preset '" + m.preset + "'");
}

std::vector<std::string> preset_names() {
  return {"torus", "torus-evolve", "torus-nf", "broken", "hyperbolic", "anharmonic", "sphere", "counterexample"};
}

Json preset_config(const std::string& name) {
  Json torus = {
      {"seed", 1},
      {"lattice", {{"d", 2}, {"kappa", {0.0, 0.0}}, {"cone", "full"}, {"N", 200.0}}},
      {"params", {{"mu", 0.2}, {"delta", 0.2}, {"alphas", {1.0}}, {"Cs", {1.0, 2.0}}, {"Ds", {1.0, 2.0}}, {"R", 40.0}, {"tb", 0.0}}},
      {"model", {{"preset", "torus"}}},
      {"options", Json::object()}};
  if (name == "torus") return torus;
  if (name == "torus-evolve") {
    Json j = torus;
    j["lattice"]["N"] = 40.0;
    j["params"]["R"] = 8.0;
    j["options"]["evolve"] = {{"instances", 20},   {"t_max", 1e4},         {"time_points", 41},
                              {"blocks", 4},       {"remainder_order", -2.0}, {"remainder_kmax", 2.0},
                              {"remainder_t_max", 1e3}, {"dt", 0.1},       {"s", {0.0, 1.0, 2.0}}};
    return j;
  }
  if (name == "torus-nf") {
    Json j = torus;
    j["lattice"]["N"] = 60.0;
    j["params"]["mu"] = 0.5;
    j["params"]["delta"] = 0.8;
    j["params"]["R"] = 8.0;
    j["require_valid_params"] = false;
    j["options"]["nf"] = {{"operator", "smooth"}, {"kmax", 3.0}, {"order", 0.0}, {"rmin", 16.0}};
    return j;
  }
  if (name == "broken") {
    Json j = torus;
    j["lattice"]["N"] = 60.0;
    j["params"]["mu"] = 0.3;
    j["params"]["delta"] = 0.4;
    j["params"]["Cs"] = {1.0, 0.5};
    j["params"]["R"] = 10.0;
    j["require_valid_params"] = false;
    return j;
  }
  if (name == "hyperbolic") {
    Json j = torus;
    j["lattice"]["N"] = 40.0;
    j["model"]["preset"] = "hyperbolic";
    return j;
  }
  if (name == "anharmonic") {
    Json j = torus;
    j["lattice"] = {{"d", 2}, {"kappa", {0.25, 0.0}}, {"cone", "anharmonic"}, {"N", 60.0}};
    j["model"] = {{"preset", "anharmonic"}, {"ell", 2}};
    return j;
  }
  if (name == "sphere") {
    Json j = torus;
    j["lattice"] = {{"d", 2}, {"kappa", {0.5, 0.0}}, {"cone", "rotation"}, {"N", 60.0}};
    j["model"] = {{"preset", "rotation"}, {"surface", "sphere"}};
    return j;
  }
  if (name == "counterexample") {
    Json j = torus;
    j["model"]["preset"] = "hyperbolic";
    j["options"]["counterexample"] = {{"eps", 0.5}, {"n", 1}, {"t_max", 100.0}, {"time_points", 101}, {"dt", 1e-3},
                                      {"numeric_t_max", 10.0}, {"s", {0.0, 1.0, 2.0}}};
    return j;
  }
  throw Error(ErrorCode::Config, "unknown preset '" + name + "'");
}

}  // namespace nekho
