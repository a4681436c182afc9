// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Waveguide-QED post-processing of solved modes: guided-emission rate
// factor, coupling efficiency beta and the modelled Purcell factor for an
// ideal point dipole, plus the orientation and lateral-displacement sweeps.
//
// Model: emission into one targeted guided mode (both propagation
// directions) on top of a homogeneous background rate F_bg (default 1, the
// bulk rate of the medium at the dipole site). Radiation-continuum
// corrections are outside this model, so F_P = F_wg + F_bg can never drop
// below F_bg.

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "slotwg/constants.hpp"
#include "slotwg/errors.hpp"
#include "slotwg/geometry.hpp"
#include "slotwg/modesolver.hpp"

namespace slotwg {

struct DipoleSpec {
  double x_nm = 0.0;
  double y_nm = 0.0;
  std::array<double, 3> orientation{0.0, 1.0, 0.0};  // unit vector
  double lambda_nm = 0.0;
};

struct CouplingResult {
  double f_wg = 0.0;  // guided-rate factor, both directions, vs bulk rate
  double f_bg = 1.0;  // background factor (model constant)
  double f_p = 1.0;   // F_wg + F_bg
  double beta = 0.0;  // F_wg / (F_wg + F_bg)
  int mode_id = 0;
};

inline std::array<double, 3> axis_orientation(char axis) {
  switch (axis) {
    case 'x': return {1.0, 0.0, 0.0};
    case 'y': return {0.0, 1.0, 0.0};
    case 'z': return {0.0, 0.0, 1.0};
  }
  throw ConfigError(std::string("unknown dipole axis: ") + axis);
}

namespace detail {

inline void check_dipole(const Mode& mode, const DipoleSpec& dip) {
  if (dip.lambda_nm != mode.lambda_nm)
    throw ConfigError("dipole wavelength differs from mode wavelength");
  const double n2 = dip.orientation[0] * dip.orientation[0] +
                    dip.orientation[1] * dip.orientation[1] +
                    dip.orientation[2] * dip.orientation[2];
  if (std::abs(n2 - 1.0) > 1e-9)
    throw ConfigError("dipole orientation is not a unit vector");
  const Grid2D& g = mode.fields.grid;
  if (dip.x_nm < g.origin_x_nm || dip.x_nm > g.origin_x_nm + g.width_nm() ||
      dip.y_nm < g.origin_y_nm || dip.y_nm > g.origin_y_nm + g.height_nm())
    throw ConfigError("dipole position outside the grid window");
}

}  // namespace detail

/// F_wg = [3 pi c^2 n_g / (n_local w^2)] |u.E(r0)|^2 / Int eps |E|^2 dA,
/// counting both propagation directions. The ratio is invariant under any
/// rescaling of the stored mode fields.
inline double guided_rate_factor(const Mode& mode, const DipoleSpec& dip,
                                 double n_local) {
  detail::check_dipole(mode, dip);
  if (!(mode.n_g > 0) || !std::isfinite(mode.n_g))
    throw ConfigError("mode has no group index; compute n_g first");
  const auto e = mode.fields.e_at(dip.x_nm, dip.y_nm);
  const Complex proj = dip.orientation[0] * e[0] + dip.orientation[1] * e[1] +
                       dip.orientation[2] * e[2];
  const double omega = 2.0 * kPi * kSpeedOfLightNmps / dip.lambda_nm;
  const double pref = 3.0 * kPi * kSpeedOfLightNmps * kSpeedOfLightNmps *
                      mode.n_g / (n_local * omega * omega);
  return pref * std::norm(proj) / mode.eps_weighted_norm();
}

/// F_bg defaults to the bulk-rate background of the model; overriding it is
/// supported for sensitivity studies.
inline CouplingResult coupling_at(const Mode& mode, const DipoleSpec& dip,
                                  double f_bg = 1.0, int mode_id = 0) {
  // The dipole sits in the slot medium beside the monolayer.
  const double n_local =
      mode.map->cross_section.empty()
          ? mode.map->cross_section.cladding_material.refractive_index(
                dip.lambda_nm)
          : mode.map->cross_section.slot_material.refractive_index(
                dip.lambda_nm);
  CouplingResult r;
  r.f_wg = guided_rate_factor(mode, dip, n_local);
  r.f_bg = f_bg;
  r.f_p = r.f_wg + f_bg;
  r.beta = r.f_wg / (r.f_wg + f_bg);
  r.mode_id = mode_id;
  return r;
}

/// Coupling along the monolayer plane for relative displacements u.
inline std::vector<std::pair<double, CouplingResult>> displacement_sweep(
    const Mode& mode, const CrossSection& cs, std::span<const double> u_samples,
    std::array<double, 3> orientation, double f_bg = 1.0, int mode_id = 0) {
  for (size_t k = 1; k < u_samples.size(); ++k)
    if (!(u_samples[k] >= u_samples[k - 1]))
      throw ConfigError("displacement samples must be monotone");
  std::vector<std::pair<double, CouplingResult>> out;
  out.reserve(u_samples.size());
  for (double u : u_samples) {
    const auto [x, y] = displacement_to_coords(cs, u);
    DipoleSpec dip{x, y, orientation, mode.lambda_nm};
    out.emplace_back(u, coupling_at(mode, dip, f_bg, mode_id));
  }
  return out;
}

struct OrientationTable {
  CouplingResult x, y, z;
};

inline OrientationTable orientation_table(const Mode& mode, double x_nm,
                                          double y_nm, double f_bg = 1.0,
                                          int mode_id = 0) {
  OrientationTable t;
  for (char axis : {'x', 'y', 'z'}) {
    DipoleSpec dip{x_nm, y_nm, axis_orientation(axis), mode.lambda_nm};
    const CouplingResult r = coupling_at(mode, dip, f_bg, mode_id);
    (axis == 'x' ? t.x : axis == 'y' ? t.y : t.z) = r;
  }
  return t;
}

}  // namespace slotwg
