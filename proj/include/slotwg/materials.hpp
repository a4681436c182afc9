// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slotwg/errors.hpp"
#include "slotwg/textkv.hpp"

namespace slotwg {

enum class DispersionKind { kSellmeier, kConstant };

struct SellmeierTerm {
  double b = 0.0;
  double c_um2 = 0.0;  // pole position squared, um^2
};

/// Wavelength-dependent refractive index of one medium. Real-valued only;
/// absorption is carried as an informational note, never entered into the
/// eigenproblem.
class MaterialModel {
 public:
  MaterialModel() = default;

  static MaterialModel sellmeier(std::string name,
                                 std::vector<SellmeierTerm> terms,
                                 double lambda_min_nm, double lambda_max_nm,
                                 std::string loss_note = "") {
    MaterialModel m;
    m.name_ = std::move(name);
    m.kind_ = DispersionKind::kSellmeier;
    m.terms_ = std::move(terms);
    m.lambda_min_nm_ = lambda_min_nm;
    m.lambda_max_nm_ = lambda_max_nm;
    m.loss_note_ = std::move(loss_note);
    m.validate();
    return m;
  }

  static MaterialModel constant(std::string name, double n,
                                double lambda_min_nm, double lambda_max_nm,
                                std::string loss_note = "") {
    MaterialModel m;
    m.name_ = std::move(name);
    m.kind_ = DispersionKind::kConstant;
    m.constant_n_ = n;
    m.lambda_min_nm_ = lambda_min_nm;
    m.lambda_max_nm_ = lambda_max_nm;
    m.loss_note_ = std::move(loss_note);
    m.validate();
    return m;
  }

  const std::string& name() const { return name_; }
  DispersionKind kind() const { return kind_; }
  double lambda_min_nm() const { return lambda_min_nm_; }
  double lambda_max_nm() const { return lambda_max_nm_; }
  const std::string& loss_note() const { return loss_note_; }
  const std::vector<SellmeierTerm>& terms() const { return terms_; }

  /// n(lambda). Out-of-range wavelengths are rejected, naming the material
  /// and its validity window.
  double refractive_index(double lambda_nm) const {
    check_range(lambda_nm);
    if (kind_ == DispersionKind::kConstant) return constant_n_;
    const double l2 = lambda_nm * lambda_nm * 1e-6;  // um^2 inside the fit
    double n2 = 1.0;
    for (const auto& t : terms_) n2 += t.b * l2 / (l2 - t.c_um2);
    return std::sqrt(n2);
  }

  double permittivity(double lambda_nm) const {
    const double n = refractive_index(lambda_nm);
    return n * n;
  }

  bool operator==(const MaterialModel& o) const {
    return name_ == o.name_ && kind_ == o.kind_ &&
           constant_n_ == o.constant_n_ && lambda_min_nm_ == o.lambda_min_nm_ &&
           lambda_max_nm_ == o.lambda_max_nm_ && terms_count_equal(o);
  }

 private:
  bool terms_count_equal(const MaterialModel& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    for (size_t i = 0; i < terms_.size(); ++i)
      if (terms_[i].b != o.terms_[i].b || terms_[i].c_um2 != o.terms_[i].c_um2)
        return false;
    return true;
  }

  void check_range(double lambda_nm) const {
    if (lambda_nm < lambda_min_nm_ || lambda_nm > lambda_max_nm_)
      throw ConfigError("wavelength " + std::to_string(lambda_nm) +
                        " nm outside validity window [" +
                        std::to_string(lambda_min_nm_) + ", " +
                        std::to_string(lambda_max_nm_) + "] nm of material " +
                        name_);
  }

  void validate() const {
    if (name_.empty()) throw ConfigError("material with empty name");
    if (!(lambda_min_nm_ > 0) || !(lambda_max_nm_ > lambda_min_nm_))
      throw ConfigError("material " + name_ + ": bad validity window");
    if (kind_ == DispersionKind::kConstant) {
      if (constant_n_ < 1.0)
        throw ConfigError("material " + name_ + ": constant index < 1");
      return;
    }
    if (terms_.empty())
      throw ConfigError("material " + name_ + ": no Sellmeier terms");
    // No pole may fall inside [lambda_min^2, lambda_max^2].
    const double lo = lambda_min_nm_ * lambda_min_nm_ * 1e-6;
    const double hi = lambda_max_nm_ * lambda_max_nm_ * 1e-6;
    for (const auto& t : terms_)
      if (t.c_um2 >= lo && t.c_um2 <= hi)
        throw ConfigError("material " + name_ +
                          ": Sellmeier pole inside validity window");
    // n must be real and >= 1 across the window.
    for (int i = 0; i <= 64; ++i) {
      const double l = lambda_min_nm_ +
                       (lambda_max_nm_ - lambda_min_nm_) * (i / 64.0);
      const double l2 = l * l * 1e-6;
      double n2 = 1.0;
      for (const auto& t : terms_) n2 += t.b * l2 / (l2 - t.c_um2);
      if (!(n2 >= 1.0))
        throw ConfigError("material " + name_ +
                          ": n(lambda) < 1 inside validity window");
    }
  }

  std::string name_;
  DispersionKind kind_ = DispersionKind::kConstant;
  std::vector<SellmeierTerm> terms_;
  double constant_n_ = 1.0;
  double lambda_min_nm_ = 0.0;
  double lambda_max_nm_ = 0.0;
  std::string loss_note_;
};

/// Free-function spellings used throughout the toolkit.
inline double refractive_index(const MaterialModel& m, double lambda_nm) {
  return m.refractive_index(lambda_nm);
}
inline double permittivity(const MaterialModel& m, double lambda_nm) {
  return m.permittivity(lambda_nm);
}

/// Material records loaded from the shipped database file. One
/// [material "Name"] section per medium; unknown keys are rejected.
class MaterialDb {
 public:
  static MaterialDb load(const std::string& path) {
    return from_document(textkv::parse_file(path), path);
  }

  static MaterialDb from_string(const std::string& text) {
    return from_document(textkv::parse_string(text, "<materials>"),
                         "<materials>");
  }

  const MaterialModel& get(std::string_view name) const {
    auto it = materials_.find(std::string(name));
    if (it == materials_.end())
      throw ConfigError("unknown material: " + std::string(name));
    return it->second;
  }

  bool contains(std::string_view name) const {
    return materials_.count(std::string(name)) > 0;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : materials_) out.push_back(k);
    return out;
  }

 private:
  static MaterialDb from_document(const textkv::Document& doc,
                                  const std::string& origin) {
    MaterialDb db;
    for (const auto& sec : doc.sections) {
      if (sec.name != "material")
        throw ConfigError(origin + ": unexpected section [" + sec.name +
                          "] in material database");
      if (sec.label.empty())
        throw ConfigError(origin + ": material section without a name label");
      std::string kind;
      std::vector<SellmeierTerm> terms;
      double const_n = 0.0;
      bool have_const_n = false;
      double lo = 0.0, hi = 0.0;
      std::string loss_note;
      for (const auto& e : sec.entries) {
        if (e.key == "kind") {
          kind = e.value;
        } else if (e.key == "term") {
          auto v = textkv::to_double_list(e.value, "term");
          if (v.size() != 2)
            throw ConfigError(origin + ": material " + sec.label +
                              ": `term` needs exactly B and C (um^2)");
          terms.push_back({v[0], v[1]});
        } else if (e.key == "index") {
          const_n = textkv::to_double(e.value, "index");
          have_const_n = true;
        } else if (e.key == "valid_range_nm") {
          auto v = textkv::to_double_list(e.value, "valid_range_nm");
          if (v.size() != 2)
            throw ConfigError(origin + ": material " + sec.label +
                              ": `valid_range_nm` needs min and max");
          lo = v[0];
          hi = v[1];
        } else if (e.key == "loss_note") {
          loss_note = e.value;
        } else {
          throw ConfigError(origin + ": material " + sec.label +
                            ": unknown field `" + e.key + "`");
        }
      }
      MaterialModel m;
      if (kind == "sellmeier") {
        if (have_const_n)
          throw ConfigError(origin + ": material " + sec.label +
                            ": `index` not allowed for sellmeier kind");
        m = MaterialModel::sellmeier(sec.label, terms, lo, hi, loss_note);
      } else if (kind == "constant") {
        if (!terms.empty())
          throw ConfigError(origin + ": material " + sec.label +
                            ": `term` not allowed for constant kind");
        if (!have_const_n)
          throw ConfigError(origin + ": material " + sec.label +
                            ": constant kind needs `index`");
        m = MaterialModel::constant(sec.label, const_n, lo, hi, loss_note);
      } else {
        throw ConfigError(origin + ": material " + sec.label +
                          ": kind must be sellmeier or constant");
      }
      if (!db.materials_.emplace(sec.label, std::move(m)).second)
        throw ConfigError(origin + ": duplicate material " + sec.label);
    }
    return db;
  }

  std::map<std::string, MaterialModel> materials_;
};

}  // namespace slotwg
