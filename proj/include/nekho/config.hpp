// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: JSON tree with lattice / params / model sections
// plus per-command option blocks. Canonical dump is hashed into every output.

#pragma once

#include "nekho/core.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nekho {

using Json = nlohmann::json;

struct LatticeSpec {
  int d = 2;
  std::vector<double> kappa;                 // empty = 0
  std::string cone = "full";                 // full | anharmonic | rotation | half_planes
  std::vector<std::vector<double>> normals;  // half_planes only
  double N = 50.0;
  std::size_t max_points = Lattice::kDefaultMaxPoints;
};

struct ModelSpec {
  std::string preset = "torus";      // torus | quadratic | lie | hyperbolic | power | anharmonic | rotation
  std::vector<double> coefficients;  // row-major d×d matrix; empty = identity
  double degree = 2.0;               // power only
  int ell = 1;                       // anharmonic only
  std::string surface = "sphere";    // rotation only: sphere | ellipsoid | bumpy
  int nodes = 48;                    // Chebyshev nodes for action-derived models
};

struct ExperimentConfig {
  std::string command;
  LatticeSpec lattice;
  NekhoroshevParams params;
  ModelSpec model;
  std::uint64_t seed = 1;
  std::string out = "out";
  int threads = 1;
  bool require_valid_params = true;
  Json options = Json::object();  // per-command settings, e.g. options["evolve"]
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

/// Apply "a.b.c=value" overrides; value is parsed as JSON, falling back to a string.
void apply_override(Json& j, const std::string& assignment);

/// FNV-1a of the canonical dump (output directory and thread count excluded).
std::uint64_t config_hash(const ExperimentConfig& c);
std::string hex64(std::uint64_t h);

Cone make_cone(const LatticeSpec& s);
Lattice make_lattice(const LatticeSpec& s);
FrequencyModel make_model(const ModelSpec& m, int d);

/// Option lookup with default inside options[command].
template <class T>
T option(const ExperimentConfig& c, const std::string& section, const std::string& key, T fallback) {
  auto s = c.options.find(section);
  if (s == c.options.end() || !s->is_object()) return fallback;
  auto v = s->find(key);
  if (v == s->end() || v->is_null()) return fallback;
  try {
    return v->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "options." + section + "." + key + ": " + e.what());
  }
}

/// Built-in configurations: torus, torus-evolve, torus-nf, broken, hyperbolic,
/// anharmonic, sphere, counterexample.
Json preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace nekho
