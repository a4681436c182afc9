// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Full-vectorial finite-difference eigenmode solver on the staggered grid.
//
// Unknowns are the transverse fields (Ex, Ey). With exp(i(wt - bz))
// dependence and lengths in nm, eliminating Ez and H from the curl
// equations gives the block operator
//
//   [Pxx Pxy] [Ex]        [Ex]          Pxx = Ux ez^-1 Vx ex + Vy Uy + k0^2 ex
//   [Pyx Pyy] [Ey] = b^2  [Ey]   with   Pxy = Ux ez^-1 Vy ey - Vy Ux
//                                       Pyx = Uy ez^-1 Vx ex - Vx Uy
//                                       Pyy = Uy ez^-1 Vy ey + Vx Ux + k0^2 ey
//
// where U are forward differences (nodes -> edges), V backward differences
// (edges -> nodes), and ex/ey/ez the staggered permittivity samples. The
// ez^-1 terms carry the D-field continuity that makes the slot discontinuity
// explicit. Window boundary is homogeneous Dirichlet on all unknowns
// (adequate-padding is enforced at solve time); an optional Neumann x-wall
// turns the solver into a quasi-1D slab solver for oracle comparisons.
//
// Eigensolve: shift-invert about (n_eff_guess k0)^2 via sparse LU plus a
// restarted Arnoldi iteration with locking of converged pairs.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "slotwg/constants.hpp"
#include "slotwg/errors.hpp"
#include "slotwg/geometry.hpp"

namespace slotwg {

using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class XBoundary { kDirichlet, kNeumann };

struct SolverOptions {
  int n_modes = 1;
  double n_eff_guess = 0.0;  // 0 -> 0.98 * n_rail
  double residual_tol = 1e-8;  // relative to (n_rail k0)^2
  int krylov_dim = 32;
  int max_restarts = 60;
  XBoundary x_boundary = XBoundary::kDirichlet;
  double boundary_field_tol = 1e-6;
  bool check_boundary = true;
};

struct SolveRequest {
  PermittivityMap map;
  double lambda_nm = 0.0;
  SolverOptions options;
};

// ---------------------------------------------------------------------------
// Operator assembly
// ---------------------------------------------------------------------------

struct OperatorLayout {
  int nx = 0, ny = 0;
  XBoundary x_boundary = XBoundary::kDirichlet;
  int n_ex = 0;  // unknown counts
  int n_ey = 0;
  int size() const { return n_ex + n_ey; }

  // Ex unknowns: all i in [0,nx), interior j in [1,ny-1].
  int ex_index(int i, int j) const { return (j - 1) * nx + i; }
  // Ey unknowns: j in [0,ny); i interior for Dirichlet, all for Neumann.
  int ey_index(int i, int j) const {
    if (x_boundary == XBoundary::kDirichlet)
      return n_ex + j * (nx - 1) + (i - 1);
    return n_ex + j * (nx + 1) + i;
  }
};

struct AssembledOperator {
  SparseMat matrix;  // reduced to unknowns, Dirichlet rows eliminated
  OperatorLayout layout;
  double k0 = 0.0;
};

namespace fd {

// Forward difference, node line (n+1 values) -> edge line (n values).
inline SparseMat forward_diff(int n, double d) {
  SparseMat m(n, n + 1);
  std::vector<Triplet> t;
  t.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, -1.0 / d);
    t.emplace_back(i, i + 1, 1.0 / d);
  }
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Ghost-edge convention for the backward difference at the window walls.
// kGhostZero: Dirichlet, missing edges are zero (one-sided wall rows).
// kGhostEven: wall rows vanish; admits x-constant fields exactly (used for
//             the flux and cross paths under Neumann walls).
// kGhostOdd:  wall rows 2 e/d; the proper Neumann second difference (used
//             for the plain Laplacian path, removing the spurious linear
//             null vector).
enum class Ghost { kGhostZero, kGhostEven, kGhostOdd };

// Backward difference, edge line (n values) -> node line (n+1 values).
inline SparseMat backward_diff(int n, double d, Ghost ghost) {
  SparseMat m(n + 1, n);
  std::vector<Triplet> t;
  t.reserve(2 * n + 2);
  for (int i = 0; i <= n; ++i) {
    const bool wall = (i == 0 || i == n);
    if (wall && ghost == Ghost::kGhostEven) continue;
    if (wall && ghost == Ghost::kGhostOdd) {
      if (i == 0) t.emplace_back(0, 0, 2.0 / d);
      else t.emplace_back(n, n - 1, -2.0 / d);
      continue;
    }
    if (i <= n - 1) t.emplace_back(i, i, 1.0 / d);
    if (i >= 1) t.emplace_back(i, i - 1, -1.0 / d);
  }
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// kron(I_m, M): block-diagonal repetition (operator acting along x).
inline SparseMat kron_id_m(int m, const SparseMat& M) {
  SparseMat out(m * M.rows(), m * M.cols());
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(m) * M.nonZeros());
  for (int b = 0; b < m; ++b)
    for (int k = 0; k < M.outerSize(); ++k)
      for (SparseMat::InnerIterator it(M, k); it; ++it)
        t.emplace_back(b * M.rows() + static_cast<int>(it.row()),
                       b * M.cols() + static_cast<int>(it.col()), it.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// kron(M, I_m): operator acting along y with x-fastest storage.
inline SparseMat kron_m_id(const SparseMat& M, int m) {
  SparseMat out(M.rows() * m, M.cols() * m);
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(m) * M.nonZeros());
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMat::InnerIterator it(M, k); it; ++it)
      for (int b = 0; b < m; ++b)
        t.emplace_back(static_cast<int>(it.row()) * m + b,
                       static_cast<int>(it.col()) * m + b, it.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline SparseMat diag(const std::vector<double>& v, bool invert = false) {
  SparseMat m(static_cast<int>(v.size()), static_cast<int>(v.size()));
  std::vector<Triplet> t;
  t.reserve(v.size());
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    t.emplace_back(i, i, invert ? 1.0 / v[i] : v[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace fd

inline AssembledOperator assemble_operator(
    const PermittivityMap& map, double lambda_nm,
    XBoundary xbc = XBoundary::kDirichlet) {
  const Grid2D& g = map.grid;
  const int nx = g.nx, ny = g.ny;
  if (ny < 8 || (xbc == XBoundary::kDirichlet && nx < 8))
    throw ConfigError("grid too small for mode solving (need >= 8 cells)");
  if (map.lambda_nm != lambda_nm)
    throw ConfigError("permittivity map was sampled at a different wavelength");

  const double dx = g.dx_nm, dy = g.dy_nm;
  const double k0 = 2.0 * kPi / lambda_nm;
  const double k02 = k0 * k0;

  // 1D building blocks. Under Neumann x-walls the flux/cross paths use the
  // even-ghost difference and the Ey x-Laplacian the odd-ghost one, so that
  // x-invariant slab modes are exact eigenfunctions with no spurious
  // degenerate partner.
  const bool dir_x = (xbc == XBoundary::kDirichlet);
  const SparseMat ux = fd::forward_diff(nx, dx);
  const SparseMat vx_flux = fd::backward_diff(
      nx, dx, dir_x ? fd::Ghost::kGhostZero : fd::Ghost::kGhostEven);
  const SparseMat vx_lap = fd::backward_diff(
      nx, dx, dir_x ? fd::Ghost::kGhostZero : fd::Ghost::kGhostOdd);
  const SparseMat uy = fd::forward_diff(ny, dy);
  const SparseMat vy = fd::backward_diff(ny, dy, fd::Ghost::kGhostZero);

  // Full-lattice 2D operators (x-fastest ordering).
  const SparseMat dx_e2n = fd::kron_id_m(ny + 1, vx_flux);  // Ex -> nodes
  const SparseMat dx_n2e = fd::kron_id_m(ny + 1, ux);       // nodes -> Ex
  const SparseMat dy_e2n = fd::kron_m_id(vy, nx + 1);       // Ey -> nodes
  const SparseMat dy_n2e = fd::kron_m_id(uy, nx + 1);       // nodes -> Ey
  const SparseMat dy_x2c = fd::kron_m_id(uy, nx);           // Ex -> centres
  const SparseMat dy_c2x = fd::kron_m_id(vy, nx);           // centres -> Ex
  const SparseMat dx_y2c = fd::kron_id_m(ny, ux);           // Ey -> centres
  const SparseMat dx_c2y_cross = fd::kron_id_m(ny, vx_flux);
  const SparseMat dx_c2y_lap = fd::kron_id_m(ny, vx_lap);

  const SparseMat exd = fd::diag(map.eps_x);
  const SparseMat eyd = fd::diag(map.eps_y);
  const SparseMat ezi = fd::diag(map.eps_z, /*invert=*/true);

  SparseMat pxx = dx_n2e * ezi * dx_e2n * exd + dy_c2x * dy_x2c + k02 * exd;
  SparseMat pxy = dx_n2e * ezi * dy_e2n * eyd - dy_c2x * dx_y2c;
  SparseMat pyx = dy_n2e * ezi * dx_e2n * exd - dx_c2y_cross * dy_x2c;
  SparseMat pyy =
      dy_n2e * ezi * dy_e2n * eyd + dx_c2y_lap * dx_y2c + k02 * eyd;

  // Reduce to unknowns: drop Ex rows at j = 0, ny and (Dirichlet) Ey rows at
  // i = 0, nx; the dropped samples are identically zero.
  OperatorLayout lay;
  lay.nx = nx;
  lay.ny = ny;
  lay.x_boundary = xbc;
  lay.n_ex = nx * (ny - 1);
  lay.n_ey = (xbc == XBoundary::kDirichlet) ? (nx - 1) * ny : (nx + 1) * ny;

  const int full_ex = nx * (ny + 1);
  const int full_ey = (nx + 1) * ny;
  std::vector<int> ex_map(full_ex, -1), ey_map(full_ey, -1);
  for (int j = 1; j <= ny - 1; ++j)
    for (int i = 0; i < nx; ++i) ex_map[j * nx + i] = lay.ex_index(i, j);
  for (int j = 0; j < ny; ++j) {
    const int ilo = (xbc == XBoundary::kDirichlet) ? 1 : 0;
    const int ihi = (xbc == XBoundary::kDirichlet) ? nx - 1 : nx;
    for (int i = ilo; i <= ihi; ++i)
      ey_map[j * (nx + 1) + i] = lay.ey_index(i, j);
  }

  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(pxx.nonZeros()) + pxy.nonZeros() +
            pyx.nonZeros() + pyy.nonZeros());
  auto add_block = [&t](const SparseMat& m, const std::vector<int>& rmap,
                        const std::vector<int>& cmap) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMat::InnerIterator it(m, k); it; ++it) {
        const int r = rmap[it.row()];
        const int c = cmap[it.col()];
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
      }
  };
  add_block(pxx, ex_map, ex_map);
  add_block(pxy, ex_map, ey_map);
  add_block(pyx, ey_map, ex_map);
  add_block(pyy, ey_map, ey_map);

  AssembledOperator op;
  op.layout = lay;
  op.k0 = k0;
  op.matrix.resize(lay.size(), lay.size());
  op.matrix.setFromTriplets(t.begin(), t.end());
  op.matrix.makeCompressed();
  return op;
}

// ---------------------------------------------------------------------------
// Mode record and field access
// ---------------------------------------------------------------------------

using Complex = std::complex<double>;

/// Discretized complex mode fields on their staggered lattices. The stored H
/// is eta0*H (vacuum-impedance units), so the axial power is
/// P = 1/2 Re Int (E x H*) . z dA in these internal units.
struct FieldSet {
  Grid2D grid;
  std::vector<Complex> ex, ey, ez;  // Ex: nx x (ny+1); Ey: (nx+1) x ny;
                                    // Ez: (nx+1) x (ny+1)
  std::vector<Complex> hx, hy, hz;  // Hx on Ey lattice; Hy on Ex lattice;
                                    // Hz on cell centres (nx x ny)

  // Bilinear interpolation of one component at a physical point. Sample
  // offsets (in cells) follow the lattice definitions above.
  Complex interpolate(const std::vector<Complex>& a, int nx_pts, int ny_pts,
                      double off_x, double off_y, double x, double y) const {
    const double fx = (x - grid.origin_x_nm) / grid.dx_nm - off_x;
    const double fy = (y - grid.origin_y_nm) / grid.dy_nm - off_y;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, nx_pts - 2);
    j = std::clamp(j, 0, ny_pts - 2);
    const double tx = std::clamp(fx - i, 0.0, 1.0);
    const double ty = std::clamp(fy - j, 0.0, 1.0);
    auto at = [&](int ii, int jj) { return a[jj * nx_pts + ii]; };
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
           (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
  }

  Complex ex_at(double x, double y) const {
    return interpolate(ex, grid.nx, grid.ny + 1, 0.5, 0.0, x, y);
  }
  Complex ey_at(double x, double y) const {
    return interpolate(ey, grid.nx + 1, grid.ny, 0.0, 0.5, x, y);
  }
  Complex ez_at(double x, double y) const {
    return interpolate(ez, grid.nx + 1, grid.ny + 1, 0.0, 0.0, x, y);
  }
  std::array<Complex, 3> e_at(double x, double y) const {
    return {ex_at(x, y), ey_at(x, y), ez_at(x, y)};
  }
};

struct Mode {
  double lambda_nm = 0.0;
  double n_eff = 0.0;
  double n_g = std::numeric_limits<double>::quiet_NaN();
  FieldSet fields;
  double pol_fraction_y = 0.0;
  double gamma_slot = 0.0;
  double residual = 0.0;  // ||A v - b^2 v|| with ||v|| = 1
  double power = 1.0;     // axial power after normalization (internal units)
  std::shared_ptr<const PermittivityMap> map;

  /// Int eps |E|^2 dA over the whole window (internal units, nm^2).
  double eps_weighted_norm() const {
    const auto& m = *map;
    const int nx = fields.grid.nx, ny = fields.grid.ny;
    double sum = 0.0;
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i)
        sum += m.ex_at(i, j) * std::norm(fields.ex[j * nx + i]);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i)
        sum += m.ey_at(i, j) * std::norm(fields.ey[j * (nx + 1) + i]);
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        sum += m.ez_at(i, j) * std::norm(fields.ez[j * (nx + 1) + i]);
    return sum * fields.grid.dx_nm * fields.grid.dy_nm;
  }
};

// ---------------------------------------------------------------------------
// Shift-invert Arnoldi with locking
// ---------------------------------------------------------------------------

namespace detail {

struct EigenPair {
  double value = 0.0;  // eigenvalue of A (= beta^2)
  Eigen::VectorXd vector;
  double residual = 0.0;
};

// Orthogonalize w against the columns in basis (modified Gram-Schmidt, two
// passes); returns the removed coefficients against `coeffs_into` if given.
inline void mgs(const std::vector<Eigen::VectorXd>& basis, Eigen::VectorXd& w,
                Eigen::VectorXd* coeffs_into = nullptr) {
  for (int pass = 0; pass < 2; ++pass) {
    for (size_t k = 0; k < basis.size(); ++k) {
      const double h = basis[k].dot(w);
      w -= h * basis[k];
      if (coeffs_into && pass == 0) (*coeffs_into)(static_cast<int>(k)) += h;
    }
  }
}

/// Eigenpairs of A nearest to sigma. Deterministic (fixed RNG seed).
/// `done`, when given, is re-evaluated as pairs lock and ends the search
/// early (e.g. once enough guided modes are in hand); n_wanted caps the
/// total number of locked pairs either way.
inline std::vector<EigenPair> shift_invert_arnoldi(
    const SparseMat& a, double sigma, int n_wanted, double tol_abs,
    int krylov_dim, int max_restarts,
    const std::function<bool(const std::vector<EigenPair>&)>& done = {}) {
  const int n = static_cast<int>(a.rows());
  const int m = std::min(krylov_dim, n);

  SparseMat shifted = a;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  shifted.makeCompressed();
  Eigen::SparseLU<SparseMat> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success)
    throw SolverError(
        "shift-invert factorization failed (shift coincides with an "
        "eigenvalue or matrix is singular); adjust n_eff_guess");

  std::mt19937 rng(0x510746u);
  auto random_vector = [&]() {
    Eigen::VectorXd v(n);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
  };

  std::vector<EigenPair> locked;
  std::vector<Eigen::VectorXd> locked_vecs;
  Eigen::VectorXd start = random_vector();
  double best_unconverged_residual = std::numeric_limits<double>::max();

  for (int restart = 0; restart < max_restarts; ++restart) {
    mgs(locked_vecs, start);
    double nrm = start.norm();
    if (nrm < 1e-12) {
      start = random_vector();
      mgs(locked_vecs, start);
      nrm = start.norm();
    }
    start /= nrm;

    std::vector<Eigen::VectorXd> v;
    v.push_back(start);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    int built = 0;
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd w = lu.solve(v[k]);
      mgs(locked_vecs, w);
      // Arnoldi orthogonalization against the Krylov basis.
      for (int pass = 0; pass < 2; ++pass)
        for (int kk = 0; kk <= k; ++kk) {
          const double c = v[kk].dot(w);
          if (pass == 0) h(kk, k) += c;
          w -= c * v[kk];
        }
      const double hk = w.norm();
      h(k + 1, k) = hk;
      built = k + 1;
      if (hk < 1e-12) break;  // invariant subspace found
      v.push_back(w / hk);
    }

    // Ritz pairs of the shifted-inverse operator.
    Eigen::EigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(built, built));
    if (es.info() != Eigen::Success)
      throw SolverError("dense Hessenberg eigensolve failed");
    std::vector<int> order(built);
    for (int i = 0; i < built; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int p, int q) {
      return std::abs(es.eigenvalues()(p)) > std::abs(es.eigenvalues()(q));
    });

    bool locked_any = false;
    for (int oi : order) {
      const std::complex<double> theta = es.eigenvalues()(oi);
      if (std::abs(theta) < 1e-300) continue;
      if (std::abs(theta.imag()) > 1e-8 * std::abs(theta))
        continue;  // complex pair: not a guided mode, skip
      Eigen::VectorXd s = es.eigenvectors().col(oi).real();
      if (es.eigenvectors().col(oi).imag().norm() >
          1e-8 * es.eigenvectors().col(oi).real().norm())
        continue;
      Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < built; ++k) y += s(k) * v[k];
      const double yn = y.norm();
      if (yn < 1e-12) continue;
      y /= yn;
      double lambda = sigma + 1.0 / theta.real();
      // Inverse-iteration polish toward the exact eigenpair.
      double res = (a * y - lambda * y).norm();
      for (int it = 0; it < 5 && res > tol_abs; ++it) {
        Eigen::VectorXd z = lu.solve(y);
        mgs(locked_vecs, z);
        const double zn = z.norm();
        if (zn < 1e-12) break;
        y = z / zn;
        lambda = y.dot(a * y);
        res = (a * y - lambda * y).norm();
      }
      if (res <= tol_abs) {
        // The converged eigenpair is kept as-is; only its component
        // orthogonal to the locked set joins the deflation basis. A tiny
        // orthogonal remainder means a re-converged copy of a known pair.
        Eigen::VectorXd yd = y;
        mgs(locked_vecs, yd);
        const double ynn = yd.norm();
        if (ynn > 1e-3) {
          locked.push_back({lambda, y, res});
          locked_vecs.push_back(yd / ynn);
          locked_any = true;
        }
      } else {
        best_unconverged_residual =
            std::min(best_unconverged_residual, res);
      }
      if (static_cast<int>(locked.size()) >= n_wanted) break;
      if (done && done(locked)) break;
    }
    if (static_cast<int>(locked.size()) >= n_wanted) break;
    if (done && done(locked)) break;
    if (!locked_any) {
      // Restart from the dominant unconverged Ritz direction, perturbed so
      // stagnation cannot repeat the same subspace.
      start = v.front();
      Eigen::VectorXd bump = random_vector();
      start = 0.9 * (built > 1 ? v[1] : v[0]) + 0.1 * bump / bump.norm();
    } else {
      start = random_vector();
    }
  }

  if (locked.empty())
    throw SolverError(
        "eigensolver did not converge within the restart budget; best "
        "residual " +
        std::to_string(best_unconverged_residual));
  std::sort(locked.begin(), locked.end(),
            [](const EigenPair& p, const EigenPair& q) {
              return p.value > q.value;
            });
  return locked;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mode post-processing
// ---------------------------------------------------------------------------

namespace detail {

/// Expand a reduced eigenvector to the full staggered lattices and derive
/// Ez, H, power normalization and mode metrics.
inline Mode build_mode(const Eigen::VectorXd& vec, double beta2,
                       double residual, const AssembledOperator& op,
                       const std::shared_ptr<const PermittivityMap>& map) {
  const Grid2D& g = map->grid;
  const int nx = g.nx, ny = g.ny;
  const double dx = g.dx_nm, dy = g.dy_nm;
  const double k0 = op.k0;
  const double beta = std::sqrt(beta2);
  const Complex jbeta(0.0, beta);

  Mode mode;
  mode.lambda_nm = map->lambda_nm;
  mode.n_eff = beta / k0;
  mode.residual = residual;
  mode.map = map;
  FieldSet& f = mode.fields;
  f.grid = g;
  f.ex.assign(static_cast<size_t>(nx) * (ny + 1), Complex(0, 0));
  f.ey.assign(static_cast<size_t>(nx + 1) * ny, Complex(0, 0));
  f.ez.assign(static_cast<size_t>(nx + 1) * (ny + 1), Complex(0, 0));
  f.hx.assign(f.ey.size(), Complex(0, 0));
  f.hy.assign(f.ex.size(), Complex(0, 0));
  f.hz.assign(static_cast<size_t>(nx) * ny, Complex(0, 0));

  const OperatorLayout& lay = op.layout;
  for (int j = 1; j <= ny - 1; ++j)
    for (int i = 0; i < nx; ++i)
      f.ex[j * nx + i] = vec(lay.ex_index(i, j));
  const int ilo = (lay.x_boundary == XBoundary::kDirichlet) ? 1 : 0;
  const int ihi = (lay.x_boundary == XBoundary::kDirichlet) ? nx - 1 : nx;
  for (int j = 0; j < ny; ++j)
    for (int i = ilo; i <= ihi; ++i)
      f.ey[j * (nx + 1) + i] = vec(lay.ey_index(i, j));

  // Ez from the divergence relation i*b*ez*Ez = dx(ex Ex) + dy(ey Ey),
  // evaluated at nodes with zero ghosts (matches the assembled operator).
  auto ex_full = [&](int i, int j) -> Complex {
    if (i < 0 || i >= nx) return 0.0;
    return f.ex[j * nx + i];
  };
  auto ey_full = [&](int i, int j) -> Complex {
    if (j < 0 || j >= ny) return 0.0;
    return f.ey[j * (nx + 1) + i];
  };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const Complex ddx = (ex_full(i, j) * map->ex_safe(i, j) -
                           ex_full(i - 1, j) * map->ex_safe(i - 1, j)) /
                          dx;
      const Complex ddy = (ey_full(i, j) * map->ey_safe(i, j) -
                           ey_full(i, j - 1) * map->ey_safe(i, j - 1)) /
                          dy;
      f.ez[j * (nx + 1) + i] = (ddx + ddy) / (jbeta * map->ez_at(i, j));
    }

  // H = (i/k0) curl E in eta0 units, with d/dz -> -i*beta.
  const Complex jk0(0.0, 1.0 / k0);
  auto ez_at = [&](int i, int j) -> Complex { return f.ez[j * (nx + 1) + i]; };
  for (int j = 0; j < ny; ++j)  // Hx on the Ey lattice
    for (int i = 0; i <= nx; ++i)
      f.hx[j * (nx + 1) + i] =
          jk0 * ((ez_at(i, j + 1) - ez_at(i, j)) / dy +
                 jbeta * f.ey[j * (nx + 1) + i]);
  for (int j = 0; j <= ny; ++j)  // Hy on the Ex lattice
    for (int i = 0; i < nx; ++i)
      f.hy[j * nx + i] = jk0 * (-jbeta * f.ex[j * nx + i] -
                                (ez_at(i + 1, j) - ez_at(i, j)) / dx);
  for (int j = 0; j < ny; ++j)  // Hz on cell centres
    for (int i = 0; i < nx; ++i)
      f.hz[j * nx + i] =
          jk0 * ((f.ey[j * (nx + 1) + i + 1] - f.ey[j * (nx + 1) + i]) / dx -
                 (f.ex[(j + 1) * nx + i] - f.ex[j * nx + i]) / dy);

  // Axial power P = 1/2 Re Int (Ex Hy* - Ey Hx*) dA; normalize to P = 1.
  double p = 0.0;
  for (size_t k = 0; k < f.ex.size(); ++k)
    p += 0.5 * (f.ex[k] * std::conj(f.hy[k])).real();
  for (size_t k = 0; k < f.ey.size(); ++k)
    p -= 0.5 * (f.ey[k] * std::conj(f.hx[k])).real();
  p *= dx * dy;
  if (p <= 0.0)
    throw SolverError("mode has non-positive axial power; not a forward mode");
  const double scale = 1.0 / std::sqrt(p);
  for (auto* arr : {&f.ex, &f.ey, &f.ez, &f.hx, &f.hy, &f.hz})
    for (auto& c : *arr) c *= scale;
  mode.power = 1.0;

  // Metrics: transverse polarization fraction and slot confinement.
  double sx = 0.0, sy = 0.0;
  for (const auto& c : f.ex) sx += std::norm(c);
  for (const auto& c : f.ey) sy += std::norm(c);
  mode.pol_fraction_y = sy / (sx + sy);

  const CrossSection& cs = map->cross_section;
  if (!cs.empty()) {
    double inside = 0.0, total = 0.0;
    auto in_slot = [&](double x, double y) {
      return std::abs(x) <= cs.w_nm / 2.0 && std::abs(y) <= cs.t_slot_nm / 2.0;
    };
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double v = map->ex_at(i, j) * std::norm(f.ex[j * nx + i]);
        total += v;
        if (in_slot(g.origin_x_nm + (i + 0.5) * dx, g.node_y(j))) inside += v;
      }
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const double v = map->ey_at(i, j) * std::norm(f.ey[j * (nx + 1) + i]);
        total += v;
        if (in_slot(g.node_x(i), g.origin_y_nm + (j + 0.5) * dy)) inside += v;
      }
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const double v =
            map->ez_at(i, j) * std::norm(f.ez[j * (nx + 1) + i]);
        total += v;
        if (in_slot(g.node_x(i), g.node_y(j))) inside += v;
      }
    mode.gamma_slot = inside / total;
  }
  return mode;
}

// Peak |E| over the outermost ring of unknowns relative to the global peak.
// Neumann x-walls (quasi-1D) are not decay boundaries, so only the y-ring is
// inspected there.
inline double boundary_ring_ratio(const Mode& m, XBoundary xbc) {
  const FieldSet& f = m.fields;
  const int nx = f.grid.nx, ny = f.grid.ny;
  double peak = 0.0;
  for (const auto& c : f.ex) peak = std::max(peak, std::abs(c));
  for (const auto& c : f.ey) peak = std::max(peak, std::abs(c));
  double ring = 0.0;
  if (xbc == XBoundary::kDirichlet) {
    for (int j = 0; j <= ny; ++j) {  // Ex columns nearest the x-walls
      ring = std::max(ring, std::abs(f.ex[j * nx + 0]));
      ring = std::max(ring, std::abs(f.ex[j * nx + nx - 1]));
    }
    for (int j = 0; j < ny; ++j) {  // first interior Ey columns in x
      ring = std::max(ring, std::abs(f.ey[j * (nx + 1) + 1]));
      ring = std::max(ring, std::abs(f.ey[j * (nx + 1) + nx - 1]));
    }
  }
  for (int i = 0; i < nx; ++i) {  // first interior Ex rows in y
    ring = std::max(ring, std::abs(f.ex[1 * nx + i]));
    ring = std::max(ring, std::abs(f.ex[(ny - 1) * nx + i]));
  }
  for (int i = 0; i <= nx; ++i) {  // Ey rows nearest the y-walls
    ring = std::max(ring, std::abs(f.ey[0 * (nx + 1) + i]));
    ring = std::max(ring, std::abs(f.ey[(ny - 1) * (nx + 1) + i]));
  }
  return peak > 0 ? ring / peak : 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// solve_modes / group_index
// ---------------------------------------------------------------------------

/// Guided modes of the request, sorted by descending n_eff. Near-degenerate
/// pairs (delta n_eff < 1e-6) are ordered by pol_fraction_y descending.
/// Returns an empty vector when no guided mode exists in the window
/// (distinct from a SolverError, which signals non-convergence).
inline std::vector<Mode> solve_modes(const SolveRequest& req) {
  const PermittivityMap& map = req.map;
  const Grid2D& g = map.grid;
  if (req.lambda_nm != map.lambda_nm)
    throw ConfigError("solve request wavelength differs from map wavelength");
  if (req.options.n_modes < 1)
    throw ConfigError("n_modes must be >= 1");
  if (g.padding_nm < req.lambda_nm / 2.0)
    throw ConfigError("grid padding must be at least lambda/2 (have " +
                      std::to_string(g.padding_nm) + " nm at lambda " +
                      std::to_string(req.lambda_nm) + " nm)");

  const double n_rail = map.n_rail();
  const double n_floor = std::max(map.n_background_max(), 1.0);
  double guess = req.options.n_eff_guess;
  if (guess <= 0.0) guess = 0.98 * n_rail;
  if (!(guess > 1.0) || !(guess < n_rail))
    throw ConfigError("n_eff_guess must lie in (1, n_rail)");

  const AssembledOperator op =
      assemble_operator(map, req.lambda_nm, req.options.x_boundary);
  const double k0 = op.k0;
  const double sigma = guess * k0 * guess * k0;
  const double tol_abs = req.options.residual_tol * (n_rail * k0) *
                         (n_rail * k0);

  // Allow a few extra locks beyond n_modes: the window may contain
  // non-guided eigenvalues that must be deflated before deeper guided modes
  // appear. Stop as soon as enough guided pairs are in hand or the locked
  // spectrum has passed below the guided window.
  const int budget = req.options.n_modes + 6;
  const double k02 = k0 * k0;
  const double window_lo = n_floor * n_floor * k02;
  const double window_hi = n_rail * n_rail * k02;
  const int wanted_guided = req.options.n_modes;
  auto enough = [&](const std::vector<detail::EigenPair>& locked) {
    int guided = 0;
    double lowest = std::numeric_limits<double>::max();
    for (const auto& p : locked) {
      if (p.value > window_lo && p.value < window_hi) ++guided;
      lowest = std::min(lowest, p.value);
    }
    return guided >= wanted_guided || lowest < window_lo;
  };
  auto pairs = detail::shift_invert_arnoldi(op.matrix, sigma, budget, tol_abs,
                                            req.options.krylov_dim,
                                            req.options.max_restarts, enough);

  auto shared_map = std::make_shared<const PermittivityMap>(map);
  std::vector<Mode> modes;
  for (const auto& p : pairs) {
    if (p.value <= 0.0) continue;
    const double n_eff = std::sqrt(p.value) / k0;
    if (n_eff <= n_floor || n_eff >= n_rail) continue;
    modes.push_back(
        detail::build_mode(p.vector, p.value, p.residual, op, shared_map));
    if (static_cast<int>(modes.size()) >= req.options.n_modes) break;
  }

  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    if (std::abs(a.n_eff - b.n_eff) < 1e-6)
      return a.pol_fraction_y > b.pol_fraction_y;
    return a.n_eff > b.n_eff;
  });

  if (req.options.check_boundary) {
    for (const auto& m : modes) {
      const double r =
          detail::boundary_ring_ratio(m, req.options.x_boundary);
      if (r > req.options.boundary_field_tol)
        throw SolverError(
            "mode field at the window boundary is " + std::to_string(r) +
            " of peak (limit " +
            std::to_string(req.options.boundary_field_tol) +
            "); enlarge grid padding");
    }
  }
  return modes;
}

/// Normalized transverse-field overlap between two modes on the same grid.
inline double mode_overlap(const Mode& a, const Mode& b) {
  Complex dot(0, 0);
  double na = 0, nb = 0;
  for (size_t k = 0; k < a.fields.ex.size(); ++k) {
    dot += std::conj(a.fields.ex[k]) * b.fields.ex[k];
    na += std::norm(a.fields.ex[k]);
    nb += std::norm(b.fields.ex[k]);
  }
  for (size_t k = 0; k < a.fields.ey.size(); ++k) {
    dot += std::conj(a.fields.ey[k]) * b.fields.ey[k];
    na += std::norm(a.fields.ey[k]);
    nb += std::norm(b.fields.ey[k]);
  }
  return std::abs(dot) / std::sqrt(na * nb);
}

/// n_g = n_eff - lambda dn_eff/dlambda by central difference, re-sampling
/// material dispersion at lambda +/- delta and tracking `reference` across
/// the solves by field overlap (threshold 0.9).
inline double group_index(const SolveRequest& req, const Mode& reference,
                          double delta_nm = 1.0) {
  if (!(delta_nm > 0)) throw ConfigError("group_index: delta must be > 0");
  auto neff_at = [&](double lambda) {
    PermittivityMap m = rasterize(req.map.cross_section, req.map.grid, lambda);
    SolveRequest r;
    r.map = std::move(m);
    r.lambda_nm = lambda;
    r.options = req.options;
    r.options.n_eff_guess = std::min(reference.n_eff * 1.02,
                                     0.995 * req.map.n_rail());
    r.options.n_modes = std::max(req.options.n_modes, 2);
    auto modes = solve_modes(r);
    const Mode* best = nullptr;
    double best_ov = 0.0;
    for (const auto& cand : modes) {
      const double ov = mode_overlap(reference, cand);
      if (ov > best_ov) {
        best_ov = ov;
        best = &cand;
      }
    }
    if (!best || best_ov < 0.9)
      throw SolverError("group_index: mode tracking ambiguous (best overlap " +
                        std::to_string(best_ov) + " < 0.9)");
    return best->n_eff;
  };
  const double np = neff_at(req.lambda_nm + delta_nm);
  const double nm = neff_at(req.lambda_nm - delta_nm);
  return reference.n_eff -
         req.lambda_nm * (np - nm) / (2.0 * delta_nm);
}

}  // namespace slotwg
