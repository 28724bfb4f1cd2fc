// SPDX-License-Identifier: Apache-2.0
//
// nekho command-line front end. Talks to the library only through the C API.

#include "nekho/nekho.h"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Common {
  std::string config, preset, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> sets;
  std::optional<double> N, R, mu, delta;
  // per-command
  std::optional<double> eps, t_max;
  std::optional<int> n, instances, ell;
  std::string method, system, surface, convention, op, model;
  std::vector<double> B, R_grid;
};

const std::map<std::string, std::string> kDefaultPreset = {
    {"lattice", "torus"},       {"partition", "torus"},      {"verify", "torus"},
    {"calibrate", "torus"},     {"steep", "torus"},          {"actions", "anharmonic"},
    {"invert", "anharmonic"},   {"nf-split", "torus-nf"},    {"nf-solve", "torus-nf"},
    {"evolve", "torus-evolve"}, {"counterexample", "counterexample"}};

const std::map<std::string, std::string> kDescriptions = {
    {"lattice", "enumerate the lattice, nonresonant region and resonant zones"},
    {"partition", "build the extended-block partition and export it"},
    {"verify", "exhaustive partition, invariance, dyadicity and Z^(d) checks"},
    {"calibrate", "search R and C_s, D_s for a zero-violation configuration"},
    {"steep", "steepness check of the frequency model"},
    {"actions", "action variables on an (E, L) grid"},
    {"invert", "h0 on an action grid by inversion"},
    {"nf-split", "cutoff splitting of a test operator"},
    {"nf-solve", "cohomological equation and residual-order fit"},
    {"evolve", "normal-form and remainder Schroedinger evolution"},
    {"counterexample", "exact non-steep counterexample and its numerics"}};

int fail(nk_status st, const std::string& what) {
  std::cerr << "nekho: " << what << ": " << nk_last_error() << '\n';
  return st == NK_ERR_CONFIG || st == NK_ERR_INVALID_ARGUMENT ? 2 : 3;
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s + "]";
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

int run(const std::string& command, const Common& c) {
  nk_config* cfg = nullptr;
  nk_status st;
  if (!c.config.empty())
    st = nk_config_load(c.config.c_str(), &cfg);
  else
    st = nk_config_preset((c.preset.empty() ? kDefaultPreset.at(command) : c.preset).c_str(), &cfg);
  if (st != NK_OK) return fail(st, "loading configuration");

  std::vector<std::string> sets;
  if (c.seed) sets.push_back("seed=" + std::to_string(*c.seed));
  if (!c.out.empty()) sets.push_back("out=" + quoted(c.out));
  if (c.threads) sets.push_back("threads=" + std::to_string(*c.threads));
  if (c.N) sets.push_back("lattice.N=" + num(*c.N));
  if (c.R) sets.push_back("params.R=" + num(*c.R));
  if (c.mu) sets.push_back("params.mu=" + num(*c.mu));
  if (c.delta) sets.push_back("params.delta=" + num(*c.delta));
  if (!c.model.empty()) sets.push_back("model.preset=" + quoted(c.model));
  if (c.eps) sets.push_back("options.counterexample.eps=" + num(*c.eps));
  if (c.n) sets.push_back("options.counterexample.n=" + std::to_string(*c.n));
  if (c.t_max) sets.push_back("options." + std::string(command == "evolve" ? "evolve" : "counterexample") + ".t_max=" + num(*c.t_max));
  if (c.instances) sets.push_back("options.evolve.instances=" + std::to_string(*c.instances));
  if (!c.method.empty()) sets.push_back("options.steep.method=" + quoted(c.method));
  if (!c.B.empty()) sets.push_back("options.steep.B=" + list(c.B));
  if (!c.system.empty()) sets.push_back("options.actions.system=" + quoted(c.system));
  if (c.ell) sets.push_back("options.actions.ell=" + std::to_string(*c.ell));
  if (!c.surface.empty()) sets.push_back("options.actions.surface=" + quoted(c.surface));
  if (!c.convention.empty()) sets.push_back("options.actions.convention=" + quoted(c.convention));
  if (!c.op.empty()) sets.push_back("options.nf.operator=" + quoted(c.op));
  if (!c.R_grid.empty()) sets.push_back("options.calibrate.R_grid=" + list(c.R_grid));
  for (const auto& s : c.sets) sets.push_back(s);
  if (!c.threads)
    if (const char* env = std::getenv("NEKHO_THREADS")) sets.push_back(std::string("threads=") + env);

  for (const auto& s : sets)
    if ((st = nk_config_override(cfg, s.c_str())) != NK_OK) {
      nk_config_free(cfg);
      return fail(st, "override '" + s + "'");
    }

  int code = 0;
  char* summary = nullptr;
  st = nk_run(cfg, command.c_str(), &code, &summary);
  char* dumped = nullptr;
  std::string out_dir = "out";
  if (nk_config_dump(cfg, &dumped) == NK_OK) {
    const std::string d = dumped;
    const auto k = d.find("\"out\": \"");
    if (k != std::string::npos) out_dir = d.substr(k + 8, d.find('"', k + 8) - k - 8);
    nk_string_free(dumped);
  }
  nk_config_free(cfg);
  if (st != NK_OK) return fail(st, command);
  std::cout << summary << '\n';
  nk_string_free(summary);
  if (code != 0)
    std::cerr << "nekho: " << command << " reported violations; see " << out_dir << "/" << command << ".json\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nekho: resonance partitions, normal forms and Sobolev-norm growth on integer lattices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nk_version()));

  std::map<std::string, Common> opts;
  std::string chosen;
  for (const auto& [name, desc] : kDescriptions) {
    auto* sub = app.add_subcommand(name, desc);
    Common& c = opts[name];
    sub->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--preset", c.preset, "built-in configuration name");
    sub->add_option("--seed", c.seed, "64-bit seed");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (default: $NEKHO_THREADS or 1)")->check(CLI::PositiveNumber);
    sub->add_option("--set", c.sets, "override key.path=value (repeatable)");
    sub->add_option("--N", c.N, "lattice radius");
    sub->add_option("--R", c.R, "infrared radius R");
    sub->add_option("--mu", c.mu, "ultraviolet exponent");
    sub->add_option("--delta", c.delta, "small-divisor exponent");
    sub->add_option("--model", c.model, "frequency model preset");
    if (name == "counterexample") {
      sub->add_option("--eps", c.eps, "coupling");
      sub->add_option("--n", c.n, "initial mode index");
      sub->add_option("--t-max", c.t_max, "final time");
    }
    if (name == "evolve") {
      sub->add_option("--instances", c.instances, "random normal forms");
      sub->add_option("--t-max", c.t_max, "horizon");
    }
    if (name == "steep") {
      sub->add_option("--method", c.method, "sample | niederman");
      sub->add_option("--B", c.B, "steepness coefficients");
    }
    if (name == "actions" || name == "invert") {
      sub->add_option("--system", c.system, "anharmonic | rotation");
      sub->add_option("--ell", c.ell, "anharmonic exponent");
      sub->add_option("--surface", c.surface, "sphere | ellipsoid | bumpy");
      sub->add_option("--convention", c.convention, "factor-two | literal");
    }
    if (name == "nf-split" || name == "nf-solve") sub->add_option("--operator", c.op, "smooth | random");
    if (name == "calibrate") sub->add_option("--R-grid", c.R_grid, "candidate R values");
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? 0 : 2;
  }
  return run(chosen, opts[chosen]);
}
