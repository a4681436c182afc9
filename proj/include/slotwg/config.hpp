// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: flat sectioned text with explicit unit suffixes and
// strict parsing (unknown sections, unknown keys and duplicate keys are
// fatal) so physics parameters cannot be silently misspelled. A run is fully
// specified by the file plus the documented defaults.

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "slotwg/cqed.hpp"
#include "slotwg/errors.hpp"
#include "slotwg/geometry.hpp"
#include "slotwg/hashing.hpp"
#include "slotwg/materials.hpp"
#include "slotwg/modesolver.hpp"
#include "slotwg/sweep.hpp"
#include "slotwg/textkv.hpp"

namespace slotwg {

class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path) {
    return RunConfig(textkv::parse_file(path), path);
  }
  static RunConfig parse_string(const std::string& text,
                                const std::string& origin = "<config>") {
    return RunConfig(textkv::parse_string(text, origin), origin);
  }

  // ---- typed views -------------------------------------------------------

  std::optional<std::string> materials_db() const {
    return get_optional("materials", "db");
  }

  CrossSection geometry(const MaterialDb& db) const {
    CrossSection cs;
    cs.rail_material = db.get(require("geometry", "rail_material"));
    cs.w_nm = require_double("geometry", "w_nm");
    cs.h_nm = require_double("geometry", "h_nm");
    cs.t_slot_nm = require_double("geometry", "slot_nm");
    cs.slot_material = db.get(value_or("geometry", "slot_material", "SiO2"));
    cs.substrate_material = db.get(value_or("geometry", "substrate", "SiO2"));
    cs.cladding_material = db.get(value_or("geometry", "cladding", "air"));
    cs.monolayer_y_offset_nm =
        double_or("geometry", "monolayer_offset_nm", 0.0);
    cs.validate();
    return cs;
  }

  struct GridSettings {
    double dx_nm, dy_nm, padding_nm;
  };
  GridSettings grid() const {
    return {require_double("grid", "dx_nm"), require_double("grid", "dy_nm"),
            require_double("grid", "padding_nm")};
  }

  struct SolveSettings {
    double lambda_nm = 0.0;
    SolverOptions options;
    bool compute_group_index = true;
    double group_index_delta_nm = 1.0;
  };
  SolveSettings solve() const {
    SolveSettings s;
    s.lambda_nm = require_double("solve", "lambda_nm");
    s.options.n_modes = static_cast<int>(long_or("solve", "n_modes", 1));
    s.options.n_eff_guess = double_or("solve", "n_eff_guess", 0.0);
    s.options.residual_tol = double_or("solve", "residual_tol", 1e-8);
    s.options.krylov_dim = static_cast<int>(long_or("solve", "krylov_dim", 32));
    s.options.max_restarts =
        static_cast<int>(long_or("solve", "max_restarts", 60));
    s.options.boundary_field_tol =
        double_or("solve", "boundary_field_tol", 1e-6);
    s.compute_group_index = bool_or("solve", "compute_group_index", true);
    s.group_index_delta_nm = double_or("solve", "group_index_delta_nm", 1.0);
    return s;
  }

  struct CouplingSettings {
    std::vector<double> lambdas_nm;
    std::vector<char> orientations;      // centre orientation table
    std::vector<double> u_samples;       // displacement sweep
    char sweep_orientation = 'y';
    double f_bg = 1.0;
  };
  CouplingSettings coupling() const {
    CouplingSettings c;
    c.lambdas_nm = require_double_list("coupling", "lambda_nm");
    for (const auto& s :
         textkv::to_string_list(value_or("coupling", "orientations", "x y z"))) {
      if (s.size() != 1) throw ConfigError("coupling: bad orientation " + s);
      c.orientations.push_back(s[0]);
    }
    c.u_samples = double_list_or("coupling", "u_samples", {0.0});
    const std::string so = value_or("coupling", "sweep_orientation", "y");
    if (so.size() != 1)
      throw ConfigError("coupling: bad sweep_orientation " + so);
    c.sweep_orientation = so[0];
    c.f_bg = double_or("coupling", "f_bg", 1.0);
    return c;
  }

  struct SweepSettings {
    std::vector<std::string> materials;
    std::vector<std::string> bands;
    Range w, h, t;
    bool refine = true;
    int n_modes = 3;
    bool journal = true;
  };
  SweepSettings sweep() const {
    SweepSettings s;
    s.materials = textkv::to_string_list(require("sweep", "materials"));
    s.bands = textkv::to_string_list(require("sweep", "bands"));
    s.w = {require_double("sweep", "w_min_nm"),
           require_double("sweep", "w_max_nm"),
           require_double("sweep", "w_step_nm")};
    s.h = {require_double("sweep", "h_min_nm"),
           require_double("sweep", "h_max_nm"),
           require_double("sweep", "h_step_nm")};
    s.t = {require_double("sweep", "t_min_nm"),
           require_double("sweep", "t_max_nm"),
           require_double("sweep", "t_step_nm")};
    s.refine = bool_or("sweep", "refine", true);
    s.n_modes = static_cast<int>(long_or("sweep", "n_modes", 3));
    s.journal = bool_or("sweep", "journal", true);
    return s;
  }

  struct CqedSettings {
    ResonatorSpec resonator;
    EmitterParams emitter;
  };
  CqedSettings cqed() const {
    CqedSettings c;
    c.resonator.nu_fsr_hz = ghz_to_hz(require_double("cqed", "nu_fsr_ghz"));
    c.resonator.lambda0_nm = require_double("cqed", "lambda0_nm");
    c.resonator.q0 = require_double("cqed", "q0");
    c.emitter.beta = require_double("cqed", "beta");
    c.emitter.f_p = require_double("cqed", "f_p");
    if (auto g = get_optional("cqed", "gamma_l_per_s"))
      c.emitter.gamma_l_per_s = textkv::to_double(*g, "gamma_l_per_s");
    c.emitter.n_emitters = double_or("cqed", "n_emitters", 1.0);
    c.resonator.validate();
    c.emitter.validate();
    return c;
  }

  struct OutputSettings {
    std::string directory = "out";
    bool dump_fields = false;
  };
  OutputSettings output() const {
    OutputSettings o;
    o.directory = value_or("output", "directory", "out");
    o.dump_fields = bool_or("output", "dump_fields", false);
    return o;
  }

  // ---- canonical form ----------------------------------------------------

  /// Deterministic normalized text: fixed section and key order, list values
  /// single-space separated. Reparsing it yields an equal RunConfig.
  std::string canonical_text() const {
    std::ostringstream out;
    for (const auto& sec : kSchema) {
      auto it = values_.find(sec.name);
      if (it == values_.end()) continue;
      out << '[' << sec.name << "]\n";
      for (const auto& key : sec.keys) {
        auto kv = it->second.find(key);
        if (kv == it->second.end()) continue;
        std::string norm;
        for (const auto& tok : textkv::to_string_list(kv->second)) {
          if (!norm.empty()) norm += ' ';
          norm += tok;
        }
        out << key << " = " << norm << '\n';
      }
      out << '\n';
    }
    return out.str();
  }

  std::string config_hash() const { return fnv1a64_hex(canonical_text()); }

  bool operator==(const RunConfig& other) const {
    return canonical_text() == other.canonical_text();
  }

 private:
  struct SectionSchema {
    const char* name;
    std::vector<const char*> keys;
  };
  // The complete key inventory; anything else is rejected.
  static inline const std::array<SectionSchema, 8> kSchema = {{
      {"materials", {"db"}},
      {"geometry",
       {"rail_material", "w_nm", "h_nm", "slot_nm", "slot_material",
        "substrate", "cladding", "monolayer_offset_nm"}},
      {"grid", {"dx_nm", "dy_nm", "padding_nm"}},
      {"solve",
       {"lambda_nm", "n_modes", "n_eff_guess", "residual_tol", "krylov_dim",
        "max_restarts", "boundary_field_tol", "compute_group_index",
        "group_index_delta_nm"}},
      {"coupling",
       {"lambda_nm", "orientations", "u_samples", "sweep_orientation",
        "f_bg"}},
      {"sweep",
       {"materials", "bands", "w_min_nm", "w_max_nm", "w_step_nm", "h_min_nm",
        "h_max_nm", "h_step_nm", "t_min_nm", "t_max_nm", "t_step_nm", "refine",
        "n_modes", "journal"}},
      {"cqed",
       {"nu_fsr_ghz", "lambda0_nm", "q0", "beta", "f_p", "gamma_l_per_s",
        "n_emitters"}},
      {"output", {"directory", "dump_fields"}},
  }};

  RunConfig(const textkv::Document& doc, const std::string& origin) {
    for (const auto& sec : doc.sections) {
      const SectionSchema* schema = nullptr;
      for (const auto& s : kSchema)
        if (sec.name == s.name) schema = &s;
      if (!schema)
        throw ConfigError(origin + ": unknown section [" + sec.name + "]");
      if (!sec.label.empty())
        throw ConfigError(origin + ": section [" + sec.name +
                          "] does not take a label");
      auto& dst = values_[sec.name];
      for (const auto& e : sec.entries) {
        bool known = false;
        for (const auto& k : schema->keys)
          if (e.key == k) known = true;
        if (!known)
          throw ConfigError(origin + ": unknown key `" + e.key +
                            "` in section [" + sec.name + "]");
        if (!dst.emplace(e.key, e.value).second)
          throw ConfigError(origin + ": duplicate key `" + e.key +
                            "` in section [" + sec.name + "]");
      }
    }
  }

  std::optional<std::string> get_optional(const std::string& sec,
                                          const std::string& key) const {
    auto it = values_.find(sec);
    if (it == values_.end()) return std::nullopt;
    auto kv = it->second.find(key);
    if (kv == it->second.end()) return std::nullopt;
    return kv->second;
  }
  const std::string& require(const std::string& sec,
                             const std::string& key) const {
    auto it = values_.find(sec);
    if (it == values_.end())
      throw ConfigError("missing required section [" + sec + "]");
    auto kv = it->second.find(key);
    if (kv == it->second.end())
      throw ConfigError("missing required key `" + key + "` in section [" +
                        sec + "]");
    return kv->second;
  }
  double require_double(const std::string& sec, const std::string& key) const {
    return textkv::to_double(require(sec, key), key);
  }
  std::vector<double> require_double_list(const std::string& sec,
                                          const std::string& key) const {
    auto v = textkv::to_double_list(require(sec, key), key);
    if (v.empty()) throw ConfigError("key `" + key + "` has an empty list");
    return v;
  }
  std::string value_or(const std::string& sec, const std::string& key,
                       const std::string& dflt) const {
    auto v = get_optional(sec, key);
    return v ? *v : dflt;
  }
  double double_or(const std::string& sec, const std::string& key,
                   double dflt) const {
    auto v = get_optional(sec, key);
    return v ? textkv::to_double(*v, key) : dflt;
  }
  long long_or(const std::string& sec, const std::string& key,
               long dflt) const {
    auto v = get_optional(sec, key);
    return v ? textkv::to_long(*v, key) : dflt;
  }
  bool bool_or(const std::string& sec, const std::string& key,
               bool dflt) const {
    auto v = get_optional(sec, key);
    return v ? textkv::to_bool(*v, key) : dflt;
  }
  std::vector<double> double_list_or(const std::string& sec,
                                     const std::string& key,
                                     std::vector<double> dflt) const {
    auto v = get_optional(sec, key);
    return v ? textkv::to_double_list(*v, key) : dflt;
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace slotwg
