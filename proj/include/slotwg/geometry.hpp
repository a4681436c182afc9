// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "slotwg/errors.hpp"
#include "slotwg/materials.hpp"

namespace slotwg {

/// Horizontal slot waveguide cross-section. Two rails of rail_material,
/// total width w and height h, separated by a slot of thickness t_slot.
/// Coordinates: x across the width, y vertical, slot centred on y = 0.
/// Substrate fills y < -h/2; cladding everywhere else outside the core.
/// The embedded monolayer is a geometric marker plane only.
struct CrossSection {
  MaterialModel rail_material;
  double w_nm = 0.0;
  double h_nm = 0.0;
  double t_slot_nm = 0.0;
  MaterialModel slot_material;
  MaterialModel substrate_material;
  MaterialModel cladding_material;
  double monolayer_y_offset_nm = 0.0;

  /// w = h = t_slot = 0 denotes the empty cross-section (background only).
  bool empty() const { return w_nm == 0.0 && h_nm == 0.0 && t_slot_nm == 0.0; }

  double rail_thickness_nm() const { return (h_nm - t_slot_nm) / 2.0; }

  void validate() const {
    if (empty()) return;
    if (!(w_nm > 0)) throw ConfigError("cross-section: w_nm must be > 0");
    if (!(t_slot_nm > 0) || !(t_slot_nm < h_nm))
      throw ConfigError("cross-section: need 0 < slot_nm < h_nm");
    if (!(rail_thickness_nm() > 0))
      throw ConfigError("cross-section: rails have no thickness");
  }
};

/// u in [-1, 1] -> lateral dipole position. u = 0 is the optical axis,
/// |u| = 1 the waveguide edge. The y coordinate is the monolayer plane.
inline std::pair<double, double> displacement_to_coords(const CrossSection& cs,
                                                        double u) {
  if (!(u >= -1.0 && u <= 1.0))
    throw ConfigError("relative displacement |u| > 1: u = " +
                      std::to_string(u));
  return {u * cs.w_nm / 2.0, cs.monolayer_y_offset_nm};
}

/// Uniform 2D grid covering the cross-section plus padding. Cell counts are
/// rounded up to even so a node sits exactly on the mirror axis x = 0.
struct Grid2D {
  double dx_nm = 0.0;
  double dy_nm = 0.0;
  int nx = 0;  // cell counts; node lattices have nx+1 / ny+1 lines
  int ny = 0;
  double origin_x_nm = 0.0;  // coordinate of node (0, 0)
  double origin_y_nm = 0.0;
  double padding_nm = 0.0;

  double width_nm() const { return nx * dx_nm; }
  double height_nm() const { return ny * dy_nm; }
  double node_x(int i) const { return origin_x_nm + i * dx_nm; }
  double node_y(int j) const { return origin_y_nm + j * dy_nm; }

  static Grid2D make(const CrossSection& cs, double dx_nm, double dy_nm,
                     double padding_nm) {
    if (!(dx_nm > 0) || !(dy_nm > 0))
      throw ConfigError("grid: dx_nm and dy_nm must be > 0");
    if (!(padding_nm >= 0)) throw ConfigError("grid: padding_nm must be >= 0");
    Grid2D g;
    g.dx_nm = dx_nm;
    g.dy_nm = dy_nm;
    g.padding_nm = padding_nm;
    auto cells = [](double extent, double d) {
      int n = static_cast<int>(std::ceil(extent / d - 1e-9));
      if (n % 2) ++n;
      return std::max(n, 2);
    };
    g.nx = cells(cs.w_nm + 2 * padding_nm, dx_nm);
    g.ny = cells(cs.h_nm + 2 * padding_nm, dy_nm);
    g.origin_x_nm = -g.nx * dx_nm / 2.0;
    g.origin_y_nm = -g.ny * dy_nm / 2.0;
    g.validate(cs);
    return g;
  }

  void validate(const CrossSection& cs) const {
    if (nx < 2 || ny < 2) throw ConfigError("grid: too few cells");
    if (cs.w_nm / 2.0 > width_nm() / 2.0 + 1e-9 ||
        cs.h_nm / 2.0 > height_nm() / 2.0 + 1e-9)
      throw ConfigError("grid: waveguide exceeds the grid window");
  }
};

/// Relative permittivity sampled at the staggered field points.
/// Lattices, x-fastest storage (index = j*NX + i):
///   Ex: (nx)   x (ny+1)  points (x0 + (i+1/2)dx, y0 + j dy)
///   Ey: (nx+1) x (ny)    points (x0 + i dx,      y0 + (j+1/2) dy)
///   Ez: (nx+1) x (ny+1)  nodes
/// Boundary cells take the area-weighted arithmetic mean of the overlapped
/// materials; interior cells the exact material value.
struct PermittivityMap {
  Grid2D grid;
  double lambda_nm = 0.0;
  CrossSection cross_section;  // kept so dispersion can be re-sampled
  std::vector<double> eps_x, eps_y, eps_z;
  double eps_rail = 1.0;
  double eps_background_max = 1.0;  // max of substrate/cladding/slot eps

  double max_eps() const { return eps_rail; }
  double n_rail() const { return std::sqrt(eps_rail); }
  double n_background_max() const { return std::sqrt(eps_background_max); }

  double& ex_at(int i, int j) { return eps_x[j * grid.nx + i]; }
  double& ey_at(int i, int j) { return eps_y[j * (grid.nx + 1) + i]; }
  double& ez_at(int i, int j) { return eps_z[j * (grid.nx + 1) + i]; }
  double ex_at(int i, int j) const { return eps_x[j * grid.nx + i]; }
  double ey_at(int i, int j) const { return eps_y[j * (grid.nx + 1) + i]; }
  double ez_at(int i, int j) const { return eps_z[j * (grid.nx + 1) + i]; }

  // Ghost-tolerant accessors; out-of-window samples pair with zero fields,
  // so the returned value is immaterial.
  double ex_safe(int i, int j) const {
    return (i < 0 || i >= grid.nx) ? 1.0 : ex_at(i, j);
  }
  double ey_safe(int i, int j) const {
    return (j < 0 || j >= grid.ny) ? 1.0 : ey_at(i, j);
  }
};

namespace detail {

// Piecewise-constant permittivity of the cross-section at a point.
inline double region_eps(const CrossSection& cs, double x, double y,
                         double e_rail, double e_slot, double e_sub,
                         double e_clad) {
  if (!cs.empty() && std::abs(x) <= cs.w_nm / 2.0 &&
      std::abs(y) <= cs.h_nm / 2.0) {
    return std::abs(y) <= cs.t_slot_nm / 2.0 ? e_slot : e_rail;
  }
  return y < -cs.h_nm / 2.0 ? e_sub : e_clad;
}

// Exact area-weighted average over an axis-aligned cell: split the cell at
// the material boundaries and sum region eps times overlap area.
inline double cell_eps(const CrossSection& cs, double xa, double xb, double ya,
                       double yb, double e_rail, double e_slot, double e_sub,
                       double e_clad) {
  double xcuts[4] = {xa, xb, 0, 0};
  int nxc = 2;
  double ycuts[8] = {ya, yb, 0, 0, 0, 0, 0, 0};
  int nyc = 2;
  if (!cs.empty()) {
    for (double b : {-cs.w_nm / 2.0, cs.w_nm / 2.0})
      if (b > xa && b < xb) xcuts[nxc++] = b;
    for (double b : {-cs.h_nm / 2.0, -cs.t_slot_nm / 2.0, cs.t_slot_nm / 2.0,
                     cs.h_nm / 2.0})
      if (b > ya && b < yb) ycuts[nyc++] = b;
  } else if (-cs.h_nm / 2.0 > ya && -cs.h_nm / 2.0 < yb) {
    ycuts[nyc++] = -cs.h_nm / 2.0;  // substrate plane of the empty section
  }
  std::sort(xcuts, xcuts + nxc);
  std::sort(ycuts, ycuts + nyc);
  double sum = 0.0;
  for (int ix = 0; ix + 1 < nxc; ++ix) {
    const double mx = 0.5 * (xcuts[ix] + xcuts[ix + 1]);
    const double wx = xcuts[ix + 1] - xcuts[ix];
    for (int iy = 0; iy + 1 < nyc; ++iy) {
      const double my = 0.5 * (ycuts[iy] + ycuts[iy + 1]);
      const double wy = ycuts[iy + 1] - ycuts[iy];
      sum += region_eps(cs, mx, my, e_rail, e_slot, e_sub, e_clad) * wx * wy;
    }
  }
  return sum / ((xb - xa) * (yb - ya));
}

}  // namespace detail

/// Sample the cross-section onto the staggered grid at one wavelength.
/// The map is built on the x >= 0 half and mirrored, so mirror symmetry
/// holds to exact floating equality.
inline PermittivityMap rasterize(const CrossSection& cs, const Grid2D& grid,
                                 double lambda_nm) {
  cs.validate();
  PermittivityMap map;
  map.grid = grid;
  map.lambda_nm = lambda_nm;
  map.cross_section = cs;

  const double e_rail =
      cs.empty() ? 1.0 : cs.rail_material.permittivity(lambda_nm);
  const double e_slot =
      cs.empty() ? 1.0 : cs.slot_material.permittivity(lambda_nm);
  const double e_sub = cs.substrate_material.permittivity(lambda_nm);
  const double e_clad = cs.cladding_material.permittivity(lambda_nm);
  map.eps_rail = std::max({e_rail, e_slot, e_sub, e_clad});
  map.eps_background_max = std::max({e_slot, e_sub, e_clad});

  const int nx = grid.nx, ny = grid.ny;
  const double dx = grid.dx_nm, dy = grid.dy_nm;
  map.eps_x.assign(static_cast<size_t>(nx) * (ny + 1), 1.0);
  map.eps_y.assign(static_cast<size_t>(nx + 1) * ny, 1.0);
  map.eps_z.assign(static_cast<size_t>(nx + 1) * (ny + 1), 1.0);

  auto avg = [&](double xa, double xb, double ya, double yb) {
    return detail::cell_eps(cs, xa, xb, ya, yb, e_rail, e_slot, e_sub, e_clad);
  };

  // Ex points ((i+1/2)dx, j dy): mirror pair i <-> nx-1-i.
  for (int j = 0; j <= ny; ++j) {
    const double y = grid.node_y(j);
    for (int i = nx / 2; i < nx; ++i) {
      const double x = grid.origin_x_nm + (i + 0.5) * dx;
      const double e = avg(x - dx / 2, x + dx / 2, y - dy / 2, y + dy / 2);
      map.ex_at(i, j) = e;
      map.ex_at(nx - 1 - i, j) = e;
    }
  }
  // Ey points (i dx, (j+1/2)dy): mirror pair i <-> nx-i.
  for (int j = 0; j < ny; ++j) {
    const double y = grid.origin_y_nm + (j + 0.5) * dy;
    for (int i = nx / 2; i <= nx; ++i) {
      const double x = grid.node_x(i);
      const double e = avg(x - dx / 2, x + dx / 2, y - dy / 2, y + dy / 2);
      map.ey_at(i, j) = e;
      map.ey_at(nx - i, j) = e;
    }
  }
  // Ez nodes (i dx, j dy): mirror pair i <-> nx-i.
  for (int j = 0; j <= ny; ++j) {
    const double y = grid.node_y(j);
    for (int i = nx / 2; i <= nx; ++i) {
      const double x = grid.node_x(i);
      const double e = avg(x - dx / 2, x + dx / 2, y - dy / 2, y + dy / 2);
      map.ez_at(i, j) = e;
      map.ez_at(nx - i, j) = e;
    }
  }
  return map;
}

}  // namespace slotwg
