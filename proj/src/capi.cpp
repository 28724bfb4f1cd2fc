// SPDX-License-Identifier: Apache-2.0
#include "nekho/nekho.h"

#include "nekho/actions.hpp"
#include "nekho/config.hpp"
#include "nekho/evolution.hpp"
#include "nekho/experiments.hpp"
#include "nekho/steepness.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

struct nk_config {
  nekho::Json tree;
};

struct nk_lattice {
  nekho::Lattice lat;
};

namespace {

thread_local std::string g_last_error;

nk_status map_code(nekho::ErrorCode c) {
  switch (c) {
    case nekho::ErrorCode::InvalidArgument: return NK_ERR_INVALID_ARGUMENT;
    case nekho::ErrorCode::Domain: return NK_ERR_DOMAIN;
    case nekho::ErrorCode::Resource: return NK_ERR_RESOURCE;
    case nekho::ErrorCode::Config: return NK_ERR_CONFIG;
    case nekho::ErrorCode::Io: return NK_ERR_IO;
    case nekho::ErrorCode::Numerical: return NK_ERR_NUMERICAL;
  }
  return NK_ERR_INTERNAL;
}

template <class F>
nk_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return NK_OK;
  } catch (const nekho::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return NK_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NK_ERR_RESOURCE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NK_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw nekho::Error(nekho::ErrorCode::Resource, "out of memory");
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) throw nekho::Error(nekho::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* nk_version(void) { return "1.0.0"; }
const char* nk_last_error(void) { return g_last_error.c_str(); }
void nk_string_free(char* s) { std::free(s); }

nk_status nk_config_load(const char* path, nk_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) throw nekho::Error(nekho::ErrorCode::Config, std::string("cannot open config ") + path);
    nekho::Json j;
    try {
      j = nekho::Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw nekho::Error(nekho::ErrorCode::Config, std::string(path) + ": " + e.what());
    }
    (void)nekho::config_from_json(j);
    *out = new nk_config{std::move(j)};
  });
}

nk_status nk_config_parse(const char* json_text, nk_config** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    nekho::Json j;
    try {
      j = nekho::Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw nekho::Error(nekho::ErrorCode::Config, e.what());
    }
    (void)nekho::config_from_json(j);
    *out = new nk_config{std::move(j)};
  });
}

nk_status nk_config_preset(const char* name, nk_config** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = new nk_config{nekho::preset_config(name)};
  });
}

nk_status nk_config_override(nk_config* cfg, const char* assignment) {
  return guarded([&] {
    need(cfg, "cfg");
    need(assignment, "assignment");
    nekho::Json j = cfg->tree;
    nekho::apply_override(j, assignment);
    (void)nekho::config_from_json(j);
    cfg->tree = std::move(j);
  });
}

nk_status nk_config_dump(const nk_config* cfg, char** json_out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(json_out, "json_out");
    *json_out = dup_string(nekho::config_to_json(nekho::config_from_json(cfg->tree)).dump(2));
  });
}

nk_status nk_config_hash(const nk_config* cfg, uint64_t* hash_out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(hash_out, "hash_out");
    *hash_out = nekho::config_hash(nekho::config_from_json(cfg->tree));
  });
}

void nk_config_free(nk_config* cfg) { delete cfg; }

nk_status nk_run(const nk_config* cfg, const char* command, int* exit_code, char** summary_json) {
  return guarded([&] {
    need(cfg, "cfg");
    need(command, "command");
    need(exit_code, "exit_code");
    auto c = nekho::config_from_json(cfg->tree);
    c.command = command;
    const auto r = nekho::run_command(c);
    *exit_code = r.exit_code;
    if (summary_json) *summary_json = dup_string(r.summary.dump(2));
  });
}

nk_status nk_command_names(char** json_out) {
  return guarded([&] {
    need(json_out, "json_out");
    *json_out = dup_string(nekho::Json(nekho::command_names()).dump());
  });
}

nk_status nk_lattice_from_config(const nk_config* cfg, nk_lattice** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new nk_lattice{nekho::make_lattice(nekho::config_from_json(cfg->tree).lattice)};
  });
}

size_t nk_lattice_size(const nk_lattice* lat) { return lat ? lat->lat.size() : 0; }
int nk_lattice_dim(const nk_lattice* lat) { return lat ? lat->lat.dim() : 0; }

nk_status nk_lattice_point(const nk_lattice* lat, size_t id, double* coords) {
  return guarded([&] {
    need(lat, "lat");
    need(coords, "coords");
    if (id >= lat->lat.size()) throw nekho::Error(nekho::ErrorCode::InvalidArgument, "point id out of range");
    const auto p = lat->lat.point(id);
    for (Eigen::Index i = 0; i < p.size(); ++i) coords[i] = p[i];
  });
}

void nk_lattice_free(nk_lattice* lat) { delete lat; }

nk_status nk_arnold_determinant_quadratic(const double* G, int dim, const double* a, double* out) {
  return guarded([&] {
    need(G, "G");
    need(a, "a");
    need(out, "out");
    if (dim < 1) throw nekho::Error(nekho::ErrorCode::InvalidArgument, "dim must be positive");
    nekho::Mat M(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) M(r, c) = G[r * dim + c];
    const auto fm = nekho::FrequencyModel::quadratic(M);
    *out = nekho::arnold_determinant(fm, Eigen::Map<const nekho::Vec>(a, dim));
  });
}

nk_status nk_counterexample_sobolev(double eps, int n, double t, int K, double s, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = nekho::counterexample_exact(eps, n, t, K).sobolev(s);
  });
}

nk_status nk_anharmonic_a1(double E, double L, int ell, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = nekho::anharmonic_a1(E, L, ell);
  });
}

nk_status nk_sphere_a1(double E, double p_phi, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = nekho::rotation_a1(E, p_phi, nekho::RotationSurface::sphere());
  });
}

}  // extern "C"
