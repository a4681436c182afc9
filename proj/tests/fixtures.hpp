// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Shared test structures: material lookup, hand-built quasi-1D slab maps
// (x-uniform, Neumann side walls) and one cached band-1 GaP evaluation that
// several slow tests reuse.

#pragma once

#include <memory>
#include <vector>

#include "oracles.hpp"
#include "slotwg/geometry.hpp"
#include "slotwg/materials.hpp"
#include "slotwg/modesolver.hpp"
#include "slotwg/sweep.hpp"

namespace fixtures {

inline const slotwg::MaterialDb& db() {
  static slotwg::MaterialDb d =
      slotwg::MaterialDb::load(SLOTWG_DATA_DIR "/materials.db");
  return d;
}

inline slotwg::CrossSection gap_slot(double w, double h, double t) {
  slotwg::CrossSection cs;
  cs.rail_material = db().get("GaP");
  cs.slot_material = db().get("SiO2");
  cs.substrate_material = db().get("SiO2");
  cs.cladding_material = db().get("air");
  cs.w_nm = w;
  cs.h_nm = h;
  cs.t_slot_nm = t;
  return cs;
}

/// Quasi-1D request: the cross-section is made much wider than the window so
/// every column sees the pure layer stack, and the x-walls are Neumann; the
/// "waveguide interior to window" rule is deliberately bypassed by building
/// the grid by hand. dy must divide all layer boundaries for a sharp stack.
inline slotwg::SolveRequest slab_request(const slotwg::CrossSection& cs_in,
                                         double lambda_nm, double dy,
                                         double pad_y, int n_modes = 4) {
  slotwg::CrossSection cs = cs_in;
  cs.w_nm = 1e7;  // layers span the whole window
  slotwg::Grid2D g;
  g.dx_nm = dy;
  g.dy_nm = dy;
  g.nx = 4;
  int ny = static_cast<int>((cs.h_nm + 2 * pad_y) / dy + 0.5);
  if (ny % 2) ++ny;
  g.ny = ny;
  g.origin_x_nm = -g.nx * g.dx_nm / 2.0;
  g.origin_y_nm = -g.ny * g.dy_nm / 2.0;
  g.padding_nm = pad_y;

  slotwg::SolveRequest req;
  req.map = slotwg::rasterize(cs, g, lambda_nm);
  req.lambda_nm = lambda_nm;
  req.options.n_modes = n_modes;
  req.options.x_boundary = slotwg::XBoundary::kNeumann;
  return req;
}

inline oracles::SlabStack slab_stack(const slotwg::CrossSection& cs,
                                     double lambda_nm) {
  const double rail = cs.rail_material.refractive_index(lambda_nm);
  const double slot = cs.slot_material.refractive_index(lambda_nm);
  const double sub = cs.substrate_material.refractive_index(lambda_nm);
  const double clad = cs.cladding_material.refractive_index(lambda_nm);
  oracles::SlabStack s;
  s.indices = {sub, rail, slot, rail, clad};
  const double rail_t = cs.rail_thickness_nm();
  s.thickness_nm = {rail_t, cs.t_slot_nm, rail_t};
  return s;
}

/// The band-1 GaP reference evaluation shared by slow tests (10 nm grid).
inline const slotwg::GeometryEvaluation& band1_reference() {
  static slotwg::GeometryEvaluation ev = [] {
    slotwg::SolverOptions opts;
    opts.n_modes = 3;
    return slotwg::evaluate_slot_geometry(gap_slot(240, 320, 40), 10.0, 10.0,
                                          1100.0, 750.0, opts);
  }();
  return ev;
}

}  // namespace fixtures
