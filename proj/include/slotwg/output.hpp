// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// File emission: atomic writes (write-then-rename), sweep/coupling CSV and
// the binary field-dump format.
//
// Field dump layout: one ASCII header line
//   slotwg-field-dump v1 nx=<nx> ny=<ny> dx_nm=<dx> dy_nm=<dy>
//     origin_x_nm=<x> origin_y_nm=<y> lambda_nm=<l> n_eff=<n>
// followed, for each component Ex Ey Ez Hx Hy Hz in that order, by nx*ny
// little-endian float64 (re, im) pairs, row-major with x fastest. All
// components are interpolated to the cell centres so external plotters see
// one common raster.

#pragma once

#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "slotwg/coupling.hpp"
#include "slotwg/errors.hpp"
#include "slotwg/modesolver.hpp"

namespace slotwg {

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string coupling_sweep_csv(
    const std::vector<std::pair<double, CouplingResult>>& rows,
    const CrossSection& cs, double lambda_nm) {
  std::ostringstream out;
  out.precision(12);
  out << "u,x_nm,beta,F_wg,F_P,mode_id,lambda_nm\n";
  for (const auto& [u, r] : rows) {
    const auto [x, y] = displacement_to_coords(cs, u);
    out << u << ',' << x << ',' << r.beta << ',' << r.f_wg << ',' << r.f_p
        << ',' << r.mode_id << ',' << lambda_nm << '\n';
  }
  return out.str();
}

inline std::string sweep_points_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out.precision(12);
  out << "index,w_nm,h_nm,t_slot_nm,ok,beta,F_wg,F_P,n_eff,n_g,"
         "pol_fraction_y,gamma_slot,error\n";
  for (const auto& p : points) {
    std::string err = p.error;
    for (auto& c : err)
      if (c == ',' || c == '\n') c = ';';
    out << p.index << ',' << p.w_nm << ',' << p.h_nm << ',' << p.t_nm << ','
        << (p.ok ? 1 : 0) << ',' << p.beta << ',' << p.f_wg << ',' << p.f_p
        << ',' << p.n_eff << ',' << p.n_g << ',' << p.pol_fraction_y << ','
        << p.gamma_slot << ',' << err << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Binary field dump
// ---------------------------------------------------------------------------

inline std::string field_dump_bytes(const Mode& mode) {
  const Grid2D& g = mode.fields.grid;
  const int nx = g.nx, ny = g.ny;
  std::ostringstream out;
  out.precision(17);
  out << "slotwg-field-dump v1 nx=" << nx << " ny=" << ny
      << " dx_nm=" << g.dx_nm << " dy_nm=" << g.dy_nm
      << " origin_x_nm=" << g.origin_x_nm + g.dx_nm / 2.0
      << " origin_y_nm=" << g.origin_y_nm + g.dy_nm / 2.0
      << " lambda_nm=" << mode.lambda_nm << " n_eff=" << mode.n_eff << "\n";

  auto put = [&out](double v) {
    static_assert(sizeof(double) == 8);
    char buf[8];
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>(bits >> (8 * b));
    out.write(buf, 8);  // little-endian
  };

  const FieldSet& f = mode.fields;
  using Getter = Complex (FieldSet::*)(double, double) const;
  auto emit = [&](auto getter) {
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double x = g.origin_x_nm + (i + 0.5) * g.dx_nm;
        const double y = g.origin_y_nm + (j + 0.5) * g.dy_nm;
        const Complex c = getter(x, y);
        put(c.real());
        put(c.imag());
      }
  };
  emit([&](double x, double y) { return f.ex_at(x, y); });
  emit([&](double x, double y) { return f.ey_at(x, y); });
  emit([&](double x, double y) { return f.ez_at(x, y); });
  emit([&](double x, double y) {
    return f.interpolate(f.hx, g.nx + 1, g.ny, 0.0, 0.5, x, y);
  });
  emit([&](double x, double y) {
    return f.interpolate(f.hy, g.nx, g.ny + 1, 0.5, 0.0, x, y);
  });
  emit([&](double x, double y) {
    return f.interpolate(f.hz, g.nx, g.ny, 0.5, 0.5, x, y);
  });
  return out.str();
}

}  // namespace slotwg
