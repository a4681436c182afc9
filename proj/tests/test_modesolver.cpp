// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "slotwg/modesolver.hpp"

using namespace slotwg;
using fixtures::db;

namespace {

// Uniform map with analytic eigenstructure chosen so 1/eps is exact (eps a
// power of two) and the cross blocks cancel identically.
PermittivityMap uniform_map(int nx, int ny, double d, double eps) {
  CrossSection cs;
  cs.rail_material = db().get("vacuum");
  cs.slot_material = db().get("vacuum");
  cs.substrate_material = db().get("vacuum");
  cs.cladding_material = db().get("vacuum");
  Grid2D g;
  g.dx_nm = d;
  g.dy_nm = d;
  g.nx = nx;
  g.ny = ny;
  g.origin_x_nm = -nx * d / 2.0;
  g.origin_y_nm = -ny * d / 2.0;
  g.padding_nm = 1e6;
  PermittivityMap map = rasterize(cs, g, 750.0);
  for (auto& e : map.eps_x) e = eps;
  for (auto& e : map.eps_y) e = eps;
  for (auto& e : map.eps_z) e = eps;
  map.eps_rail = eps;
  map.eps_background_max = eps;
  return map;
}

}  // namespace

TEST_CASE("assembled stencil: hand-computed 5-point pattern on a patch",
          "[modesolver]") {
  // Uniform eps = 4. For an interior Ex unknown the operator row must be the
  // classic pattern  (1/dy^2) | (1/dx^2, -2/dx^2 - 2/dy^2 + k0^2 eps, 1/dx^2)
  // | (1/dy^2), and the cross block must vanish identically.
  const double d = 10.0, eps = 4.0, lambda = 750.0;
  const PermittivityMap map = uniform_map(12, 12, d, eps);
  const auto op = assemble_operator(map, lambda);
  const double k02 = std::pow(2.0 * kPi / lambda, 2);

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(op.layout.size());
  const int i0 = 5, j0 = 6;
  delta(op.layout.ex_index(i0, j0)) = 1.0;
  const Eigen::VectorXd col = op.matrix * delta;

  const double diag = -2.0 / (d * d) - 2.0 / (d * d) + k02 * eps;
  CHECK(col(op.layout.ex_index(i0, j0)) == Catch::Approx(diag).epsilon(1e-14));
  CHECK(col(op.layout.ex_index(i0 - 1, j0)) ==
        Catch::Approx(1.0 / (d * d)).epsilon(1e-14));
  CHECK(col(op.layout.ex_index(i0 + 1, j0)) ==
        Catch::Approx(1.0 / (d * d)).epsilon(1e-14));
  CHECK(col(op.layout.ex_index(i0, j0 - 1)) ==
        Catch::Approx(1.0 / (d * d)).epsilon(1e-14));
  CHECK(col(op.layout.ex_index(i0, j0 + 1)) ==
        Catch::Approx(1.0 / (d * d)).epsilon(1e-14));
  // Everything outside the 5-point pattern, including the whole Ey block.
  double off = 0.0;
  for (int r = 0; r < op.layout.size(); ++r) {
    if (r == op.layout.ex_index(i0, j0) || r == op.layout.ex_index(i0 - 1, j0) ||
        r == op.layout.ex_index(i0 + 1, j0) ||
        r == op.layout.ex_index(i0, j0 - 1) ||
        r == op.layout.ex_index(i0, j0 + 1))
      continue;
    off = std::max(off, std::abs(col(r)));
  }
  CHECK(off <= 1e-14 / (d * d));

  // Applied to the all-ones vector, interior rows reduce to k0^2 eps.
  const Eigen::VectorXd ones =
      Eigen::VectorXd::Ones(op.layout.size());
  const Eigen::VectorXd r = op.matrix * ones;
  CHECK(r(op.layout.ex_index(5, 6)) == Catch::Approx(k02 * eps).epsilon(1e-12));
  CHECK(r(op.layout.ey_index(6, 5)) == Catch::Approx(k02 * eps).epsilon(1e-12));

  // <= 9 nonzeros per row.
  for (int row = 0; row < op.matrix.outerSize(); ++row) {
    int nnz = 0;
    for (SparseMat::InnerIterator it(op.matrix, row); it; ++it) ++nnz;
    REQUIRE(nnz <= 9);
  }
}

TEST_CASE("uniform medium: discrete plane waves are exact eigenvectors",
          "[modesolver]") {
  const int nx = 14, ny = 11;
  const double d = 25.0, eps = 4.0, lambda = 750.0;
  const PermittivityMap map = uniform_map(nx, ny, d, eps);
  const auto op = assemble_operator(map, lambda);
  const double k02 = std::pow(2.0 * kPi / lambda, 2);

  // Ex block mode sin(m pi (i+1)/(nx+1)) sin(p pi j/ny).
  const int m = 2, p = 1;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(op.layout.size());
  for (int j = 1; j <= ny - 1; ++j)
    for (int i = 0; i < nx; ++i)
      v(op.layout.ex_index(i, j)) = std::sin(m * kPi * (i + 1) / (nx + 1)) *
                                    std::sin(p * kPi * j / ny);
  const double kt2 =
      4.0 / (d * d) * std::pow(std::sin(m * kPi / (2.0 * (nx + 1))), 2) +
      4.0 / (d * d) * std::pow(std::sin(p * kPi / (2.0 * ny)), 2);
  const double expected = eps * k02 - kt2;  // beta^2 of the discrete box
  const Eigen::VectorXd av = op.matrix * v;
  CHECK((av - expected * v).norm() <= 1e-12 * std::abs(expected) * v.norm());
}

TEST_CASE("hollow PEC box: lowest transverse eigenvalue", "[modesolver]") {
  // eps = 1 box: beta^2 = k0^2 - kt^2 with kt^2 -> pi^2 (1/a^2 + 1/b^2).
  const int nx = 160, ny = 120;
  const double d = 5.0;
  const double a = nx * d, b = ny * d;
  const double lambda = 750.0;
  const PermittivityMap map = uniform_map(nx, ny, d, 1.0);
  const auto op = assemble_operator(map, lambda);
  const double k02 = std::pow(2.0 * kPi / lambda, 2);

  auto pairs = detail::shift_invert_arnoldi(op.matrix, k02, 1,
                                            1e-10 * k02, 32, 40);
  REQUIRE_FALSE(pairs.empty());
  const double kt2 = k02 - pairs.front().value;

  // Continuum value within discretization error.
  const double kt2_cont = kPi * kPi * (1.0 / (a * a) + 1.0 / (b * b));
  CHECK(kt2 == Catch::Approx(kt2_cont).epsilon(0.02));

  // Discrete fundamental to near machine precision: the Ex block sees
  // effective Dirichlet widths (nx+1) d x ny d, the Ey block nx d x (ny+1) d;
  // the box fundamental is whichever is lower.
  const double kt2_ex =
      4.0 / (d * d) * std::pow(std::sin(kPi / (2.0 * (nx + 1))), 2) +
      4.0 / (d * d) * std::pow(std::sin(kPi / (2.0 * ny)), 2);
  const double kt2_ey =
      4.0 / (d * d) * std::pow(std::sin(kPi / (2.0 * nx)), 2) +
      4.0 / (d * d) * std::pow(std::sin(kPi / (2.0 * (ny + 1))), 2);
  CHECK(kt2 == Catch::Approx(std::min(kt2_ex, kt2_ey)).epsilon(1e-9));
}

TEST_CASE("quasi-1D slab matches the transfer-matrix oracle", "[modesolver]") {
  // GaP / SiO2 / GaP with 50 nm slot and 150 nm rails at 750 nm, 5 nm grid.
  const CrossSection cs = fixtures::gap_slot(0, 350, 50);
  auto cs2 = cs;
  cs2.w_nm = 350;  // placeholder; slab_request widens it anyway
  const SolveRequest req = fixtures::slab_request(cs2, 750.0, 5.0, 1400.0);
  const auto modes = solve_modes(req);
  REQUIRE(modes.size() >= 3);

  const auto stack = fixtures::slab_stack(cs2, 750.0);
  const auto tm = oracles::slab_modes(stack, 750.0, oracles::Polarization::kTM);
  const auto te = oracles::slab_modes(stack, 750.0, oracles::Polarization::kTE);
  REQUIRE(tm.size() >= 2);
  REQUIRE(te.size() >= 2);

  // Fundamental TE-like (Ex) and TM-like (Ey) modes, identified by
  // polarization fraction.
  double fd_te = -1, fd_tm = -1;
  for (const auto& m : modes) {
    if (m.pol_fraction_y > 0.5 && fd_tm < 0) fd_tm = m.n_eff;
    if (m.pol_fraction_y < 0.5 && fd_te < 0) fd_te = m.n_eff;
  }
  REQUIRE(fd_tm > 0);
  REQUIRE(fd_te > 0);
  CHECK(std::abs(fd_te - te[0]) <= 1e-3);
  CHECK(std::abs(fd_tm - tm[0]) <= 1e-3);

  // Residual bound and power normalization hold for every reported mode.
  const double k0 = 2.0 * kPi / 750.0;
  const double bound = 1e-8 * std::pow(req.map.n_rail() * k0, 2);
  for (const auto& m : modes) {
    CHECK(m.residual <= bound);
    // Recompute the axial power from the stored fields.
    double p = 0.0;
    for (size_t k = 0; k < m.fields.ex.size(); ++k)
      p += 0.5 * (m.fields.ex[k] * std::conj(m.fields.hy[k])).real();
    for (size_t k = 0; k < m.fields.ey.size(); ++k)
      p -= 0.5 * (m.fields.ey[k] * std::conj(m.fields.hx[k])).real();
    p *= m.fields.grid.dx_nm * m.fields.grid.dy_nm;
    CHECK(p == Catch::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("quasi-1D refinement converges monotonically to the oracle",
          "[modesolver]") {
  const CrossSection cs = fixtures::gap_slot(360, 360, 40);
  const auto stack = fixtures::slab_stack(cs, 750.0);
  const double exact =
      oracles::slab_modes(stack, 750.0, oracles::Polarization::kTM)[0];
  double prev_err = 1e9;
  for (double d : {20.0, 10.0, 5.0, 2.5}) {
    const SolveRequest req = fixtures::slab_request(cs, 750.0, d, 1400.0);
    const auto modes = solve_modes(req);
    double tm0 = -1;
    for (const auto& m : modes)
      if (m.pol_fraction_y > 0.5) {
        tm0 = m.n_eff;
        break;
      }
    REQUIRE(tm0 > 0);
    const double err = std::abs(tm0 - exact);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err <= 2e-4);  // 2.5 nm endpoint
}

TEST_CASE("slab group index matches the oracle dispersion derivative",
          "[modesolver]") {
  // Constant-index slab so the oracle derivative is pure waveguide
  // dispersion: n_g >= n_eff and the two routes agree to 1%.
  CrossSection cs;
  cs.rail_material = MaterialModel::constant("hi", 3.2, 500, 1000);
  cs.slot_material = MaterialModel::constant("lo", 1.45, 500, 1000);
  cs.substrate_material = cs.slot_material;
  cs.cladding_material = MaterialModel::constant("one", 1.0, 500, 1000);
  cs.h_nm = 350;
  cs.t_slot_nm = 50;

  const SolveRequest req = fixtures::slab_request(cs, 750.0, 5.0, 1400.0);
  const auto modes = solve_modes(req);
  const Mode* tm0 = nullptr;
  for (const auto& m : modes)
    if (m.pol_fraction_y > 0.5) {
      tm0 = &m;
      break;
    }
  REQUIRE(tm0);
  const double ng = group_index(req, *tm0, 1.0);
  CHECK(ng >= tm0->n_eff);  // waveguide dispersion only adds

  const auto stack = fixtures::slab_stack(cs, 750.0);
  const double ng_oracle =
      oracles::slab_group_index(stack, 750.0, oracles::Polarization::kTM, 0);
  CHECK(ng == Catch::Approx(ng_oracle).epsilon(0.01));
}

TEST_CASE("identical requests give bitwise-identical n_eff", "[modesolver]") {
  const CrossSection cs = fixtures::gap_slot(360, 360, 40);
  const SolveRequest req = fixtures::slab_request(cs, 750.0, 5.0, 1400.0);
  const auto a = solve_modes(req);
  const auto b = solve_modes(req);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) REQUIRE(a[k].n_eff == b[k].n_eff);
}

TEST_CASE("no guided mode is an empty result, not an error", "[modesolver]") {
  // Uniform SiO2 everywhere: the guided window (n_bg, n_rail) is empty.
  CrossSection cs;
  cs.rail_material = db().get("SiO2");
  cs.slot_material = db().get("SiO2");
  cs.substrate_material = db().get("SiO2");
  cs.cladding_material = db().get("SiO2");
  cs.w_nm = 300;
  cs.h_nm = 300;
  cs.t_slot_nm = 100;
  const Grid2D g = Grid2D::make(cs, 20, 20, 400);
  SolveRequest req;
  req.map = rasterize(cs, g, 750.0);
  req.lambda_nm = 750.0;
  req.options.n_modes = 1;
  CHECK(solve_modes(req).empty());
}

TEST_CASE("insufficient padding fails with guidance", "[modesolver]") {
  // lambda/2 floor is a config error.
  const CrossSection cs = fixtures::gap_slot(240, 320, 40);
  const Grid2D g = Grid2D::make(cs, 20, 20, 300);
  SolveRequest req;
  req.map = rasterize(cs, g, 750.0);
  req.lambda_nm = 750.0;
  CHECK_THROWS_AS(solve_modes(req), ConfigError);
}

TEST_CASE("boundary-field check rejects undersized windows",
          "[modesolver][slow]") {
  // Padding above lambda/2 but far too small for the mode tail: the run must
  // fail with the enlarge-padding diagnostic.
  const CrossSection cs = fixtures::gap_slot(240, 320, 40);
  const Grid2D g = Grid2D::make(cs, 10, 10, 400);
  SolveRequest req;
  req.map = rasterize(cs, g, 750.0);
  req.lambda_nm = 750.0;
  req.options.n_modes = 1;
  try {
    (void)solve_modes(req);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("padding") != std::string::npos);
  }
}

TEST_CASE("request validation", "[modesolver]") {
  const CrossSection cs = fixtures::gap_slot(240, 320, 40);
  const Grid2D g = Grid2D::make(cs, 10, 10, 400);
  SolveRequest req;
  req.map = rasterize(cs, g, 750.0);
  req.lambda_nm = 750.0;
  req.options.n_modes = 0;
  CHECK_THROWS_AS(solve_modes(req), ConfigError);
  req.options.n_modes = 1;
  req.options.n_eff_guess = 5.0;  // above n_rail
  CHECK_THROWS_AS(solve_modes(req), ConfigError);
  req.lambda_nm = 751.0;  // mismatched with the map
  CHECK_THROWS_AS(solve_modes(req), ConfigError);

  // Dirichlet windows need at least 8 cells each way.
  const PermittivityMap tiny = uniform_map(4, 20, 10, 4.0);
  CHECK_THROWS_AS(assemble_operator(tiny, 750.0), ConfigError);
}

TEST_CASE("band-1 slot mode: symmetry, polarization, tracking",
          "[modesolver][slow]") {
  const auto& ev = fixtures::band1_reference();
  const Mode& m = ev.mode;

  CHECK(m.pol_fraction_y > 0.8);
  CHECK(m.gamma_slot > 0.1);
  CHECK(m.n_g > m.n_eff);  // regression direction for the slot mode
  CHECK(m.n_eff < 3.2097 * 0.98);

  // |Ey| mirror symmetry to 1e-6 relative after normalization.
  const auto& f = m.fields;
  const int nx = f.grid.nx, ny = f.grid.ny;
  double peak = 0, worst = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i)
      peak = std::max(peak, std::abs(f.ey[j * (nx + 1) + i]));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i)
      worst = std::max(worst,
                       std::abs(std::abs(f.ey[j * (nx + 1) + i]) -
                                std::abs(f.ey[j * (nx + 1) + (nx - i)])));
  CHECK(worst <= 1e-6 * peak);

  // D-continuity: Ey just inside the slot exceeds Ey just inside the rail
  // by roughly eps_rail/eps_slot at the horizontal interface.
  const CrossSection& cs = m.map->cross_section;
  const double eps_ratio = cs.rail_material.permittivity(750.0) /
                           cs.slot_material.permittivity(750.0);
  const double y_in = cs.t_slot_nm / 2.0 - f.grid.dy_nm / 2.0;
  const double y_out = cs.t_slot_nm / 2.0 + f.grid.dy_nm / 2.0;
  const double jump = std::abs(f.ey_at(0.0, y_in)) /
                      std::abs(f.ey_at(0.0, y_out));
  CHECK(jump == Catch::Approx(eps_ratio).epsilon(0.25));
}
