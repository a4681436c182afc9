// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Geometry optimization and band studies. The objective is beta of a
// y-oriented dipole at the slot centre, evaluated at the band-centre
// wavelength: exhaustive grid search over (w, h, t_slot) followed by one
// coordinate-descent refinement pass at half step. Every evaluation is
// recorded; a journal file keyed by the sweep definition makes long sweeps
// resumable.

#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "slotwg/coupling.hpp"
#include "slotwg/errors.hpp"
#include "slotwg/geometry.hpp"
#include "slotwg/hashing.hpp"
#include "slotwg/materials.hpp"
#include "slotwg/modesolver.hpp"

namespace slotwg {

struct Band {
  std::string name;
  double lambda_min_nm = 0.0;
  double lambda_max_nm = 0.0;
  std::vector<double> lambda_samples_nm;  // endpoints + midpoint by default

  double center_nm() const { return 0.5 * (lambda_min_nm + lambda_max_nm); }

  static Band make(std::string name, double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("band: lambda_min must be < lambda_max");
    Band b;
    b.name = std::move(name);
    b.lambda_min_nm = lo;
    b.lambda_max_nm = hi;
    b.lambda_samples_nm = {lo, 0.5 * (lo + hi), hi};
    return b;
  }
  // The three reported emission bands.
  static Band band1() { return make("band1", 640.0, 800.0); }
  static Band band2() { return make("band2", 1050.0, 1150.0); }
  static Band band3() { return make("band3", 1500.0, 1600.0); }
  static Band by_name(const std::string& n) {
    if (n == "band1") return band1();
    if (n == "band2") return band2();
    if (n == "band3") return band3();
    throw ConfigError("unknown band: " + n + " (expected band1|band2|band3)");
  }
};

struct Range {
  double min_nm = 0.0;
  double max_nm = 0.0;
  double step_nm = 0.0;

  std::vector<double> values() const {
    if (!(min_nm > 0) || !(max_nm >= min_nm) || !(step_nm > 0))
      throw ConfigError("sweep range must satisfy 0 < min <= max, step > 0");
    std::vector<double> v;
    for (double x = min_nm; x <= max_nm + 1e-9; x += step_nm) v.push_back(x);
    return v;
  }
};

struct SweepSpec {
  MaterialModel rail_material;
  MaterialModel slot_material;
  MaterialModel substrate_material;
  MaterialModel cladding_material;
  double monolayer_y_offset_nm = 0.0;
  Band band;
  Range w{200, 1200, 50};
  Range h{150, 800, 50};
  Range t{20, 160, 20};
  double dx_nm = 10.0;
  double dy_nm = 10.0;
  double padding_nm = 1200.0;
  SolverOptions solver{.n_modes = 3};
  double f_bg = 1.0;
  bool refine = true;
  int threads = 1;
  std::optional<std::filesystem::path> journal_path;

  CrossSection cross_section(double w_nm, double h_nm, double t_nm) const {
    CrossSection cs;
    cs.rail_material = rail_material;
    cs.slot_material = slot_material;
    cs.substrate_material = substrate_material;
    cs.cladding_material = cladding_material;
    cs.w_nm = w_nm;
    cs.h_nm = h_nm;
    cs.t_slot_nm = t_nm;
    cs.monolayer_y_offset_nm = monolayer_y_offset_nm;
    return cs;
  }

  // Key that must match for a journal to be reused.
  std::string journal_key() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << rail_material.name() << '|' << slot_material.name() << '|'
       << substrate_material.name() << '|' << cladding_material.name() << '|'
       << band.name << '|' << band.center_nm() << '|' << w.min_nm << ','
       << w.max_nm << ',' << w.step_nm << '|' << h.min_nm << ',' << h.max_nm
       << ',' << h.step_nm << '|' << t.min_nm << ',' << t.max_nm << ','
       << t.step_nm << '|' << dx_nm << ',' << dy_nm << ',' << padding_nm << '|'
       << solver.n_modes << ',' << solver.residual_tol << '|' << f_bg << '|'
       << refine;
    return fnv1a64_hex(ss.str());
  }
};

struct SweepPoint {
  int index = -1;
  double w_nm = 0, h_nm = 0, t_nm = 0;
  bool ok = false;
  double beta = -std::numeric_limits<double>::infinity();
  double f_wg = 0, f_p = 0;
  double n_eff = 0, n_g = 0;
  double pol_fraction_y = 0, gamma_slot = 0;
  std::string error;
};

struct SweepResult {
  SweepPoint best;
  std::vector<SweepPoint> evaluated;  // sorted by index
  double objective_lambda_nm = 0;
  double dx_nm = 0, dy_nm = 0, padding_nm = 0;  // provenance
  SolverOptions solver;
  std::shared_ptr<const Mode> best_mode;  // targeted mode at the optimum
};

/// Solve one geometry and evaluate the y-dipole objective at the slot
/// centre. The target mode is the solved mode with the largest
/// |y.E(centre)|^2 / Int eps|E|^2 (the n_g factor cannot reorder this by
/// orders of magnitude); n_g is then computed for that mode only.
struct GeometryEvaluation {
  CouplingResult coupling;
  Mode mode;  // with n_g filled
  int mode_index = -1;
};

inline GeometryEvaluation evaluate_slot_geometry(const CrossSection& cs,
                                                 double dx_nm, double dy_nm,
                                                 double padding_nm,
                                                 double lambda_nm,
                                                 const SolverOptions& opts,
                                                 double f_bg = 1.0) {
  cs.validate();
  const Grid2D grid = Grid2D::make(cs, dx_nm, dy_nm, padding_nm);
  SolveRequest req;
  req.map = rasterize(cs, grid, lambda_nm);
  req.lambda_nm = lambda_nm;
  req.options = opts;
  auto modes = solve_modes(req);
  if (modes.empty()) throw SolverError("no guided mode in the search window");

  const auto [x0, y0] = displacement_to_coords(cs, 0.0);
  int best = -1;
  double best_weight = -1.0;
  for (size_t k = 0; k < modes.size(); ++k) {
    const auto e = modes[k].fields.e_at(x0, y0);
    const double wgt = std::norm(e[1]) / modes[k].eps_weighted_norm();
    if (wgt > best_weight) {
      best_weight = wgt;
      best = static_cast<int>(k);
    }
  }
  Mode mode = std::move(modes[best]);
  mode.n_g = group_index(req, mode);

  DipoleSpec dip{x0, y0, axis_orientation('y'), lambda_nm};
  GeometryEvaluation ev;
  ev.coupling = coupling_at(mode, dip, f_bg, best);
  ev.mode = std::move(mode);
  ev.mode_index = best;
  return ev;
}

namespace detail {

inline SweepPoint evaluate_point(const SweepSpec& spec, int index, double w,
                                 double h, double t, Mode* mode_out = nullptr) {
  SweepPoint p;
  p.index = index;
  p.w_nm = w;
  p.h_nm = h;
  p.t_nm = t;
  try {
    const CrossSection cs = spec.cross_section(w, h, t);
    auto ev = evaluate_slot_geometry(cs, spec.dx_nm, spec.dy_nm,
                                     spec.padding_nm, spec.band.center_nm(),
                                     spec.solver, spec.f_bg);
    p.ok = true;
    p.beta = ev.coupling.beta;
    p.f_wg = ev.coupling.f_wg;
    p.f_p = ev.coupling.f_p;
    p.n_eff = ev.mode.n_eff;
    p.n_g = ev.mode.n_g;
    p.pol_fraction_y = ev.mode.pol_fraction_y;
    p.gamma_slot = ev.mode.gamma_slot;
    if (mode_out) *mode_out = std::move(ev.mode);
  } catch (const std::exception& e) {
    p.ok = false;
    p.error = e.what();
  }
  return p;
}

// best-point ordering: larger beta wins; exact ties go to the smaller
// (w, h, t) triple so reruns are reproducible.
inline bool better_than(const SweepPoint& a, const SweepPoint& b) {
  if (a.beta != b.beta) return a.beta > b.beta;
  if (a.w_nm != b.w_nm) return a.w_nm < b.w_nm;
  if (a.h_nm != b.h_nm) return a.h_nm < b.h_nm;
  return a.t_nm < b.t_nm;
}

class SweepJournal {
 public:
  SweepJournal(const std::optional<std::filesystem::path>& path,
               const std::string& key)
      : key_(key) {
    if (!path) return;
    path_ = *path;
    load();
    // A stale journal (different sweep definition) is discarded.
    out_.open(path_->string(),
              fresh_ ? std::ios::trunc : std::ios::app);
    if (fresh_ && out_) {
      out_ << "slotwg-sweep-journal v1 key=" << key_ << "\n";
      out_.flush();
    }
  }

  bool lookup(int index, SweepPoint* p) const {
    for (const auto& q : done_)
      if (q.index == index) {
        *p = q;
        return true;
      }
    return false;
  }

  void record(const SweepPoint& p) {
    if (!out_) return;
    std::lock_guard<std::mutex> lock(mu_);
    out_.precision(17);
    if (p.ok) {
      out_ << p.index << " ok " << p.w_nm << ' ' << p.h_nm << ' ' << p.t_nm
           << ' ' << p.beta << ' ' << p.f_wg << ' ' << p.f_p << ' ' << p.n_eff
           << ' ' << p.n_g << ' ' << p.pol_fraction_y << ' ' << p.gamma_slot
           << "\n";
    } else {
      std::string msg = p.error;
      for (auto& c : msg)
        if (c == '\n' || c == ' ') c = '_';
      out_ << p.index << " fail " << p.w_nm << ' ' << p.h_nm << ' ' << p.t_nm
           << ' ' << msg << "\n";
    }
    out_.flush();
  }

 private:
  void load() {
    std::ifstream in(path_->string());
    if (!in) return;
    std::string header;
    if (!std::getline(in, header)) return;
    if (header != "slotwg-sweep-journal v1 key=" + key_) return;  // stale
    fresh_ = false;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      SweepPoint p;
      std::string status;
      if (!(ss >> p.index >> status >> p.w_nm >> p.h_nm >> p.t_nm)) continue;
      if (status == "ok") {
        if (!(ss >> p.beta >> p.f_wg >> p.f_p >> p.n_eff >> p.n_g >>
              p.pol_fraction_y >> p.gamma_slot))
          continue;
        p.ok = true;
      } else {
        ss >> p.error;
        p.ok = false;
        p.beta = -std::numeric_limits<double>::infinity();
      }
      done_.push_back(p);
    }
  }

  std::string key_;
  std::optional<std::filesystem::path> path_;
  std::vector<SweepPoint> done_;
  std::ofstream out_;
  bool fresh_ = true;
  std::mutex mu_;
};

}  // namespace detail

inline SweepResult optimize_geometry(const SweepSpec& spec) {
  const auto ws = spec.w.values();
  const auto hs = spec.h.values();
  const auto ts = spec.t.values();
  struct Candidate {
    int index;
    double w, h, t;
  };
  std::vector<Candidate> grid_points;
  int index = 0;
  for (double w : ws)
    for (double h : hs)
      for (double t : ts) grid_points.push_back({index++, w, h, t});
  if (grid_points.empty()) throw ConfigError("sweep: empty search grid");

  detail::SweepJournal journal(spec.journal_path, spec.journal_key());

  std::vector<SweepPoint> evaluated(grid_points.size());
  std::atomic<size_t> next{0};
  const int n_threads =
      std::max(1, std::min<int>(spec.threads,
                                static_cast<int>(grid_points.size())));
  auto worker = [&]() {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= grid_points.size()) return;
      const auto& c = grid_points[k];
      SweepPoint p;
      if (!journal.lookup(c.index, &p)) {
        p = detail::evaluate_point(spec, c.index, c.w, c.h, c.t);
        journal.record(p);
      }
      evaluated[k] = p;
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  bool any_ok = false;
  SweepPoint best;
  for (const auto& p : evaluated)
    if (p.ok && (!any_ok || detail::better_than(p, best))) {
      best = p;
      any_ok = true;
    }
  if (!any_ok)
    throw SolverError("sweep: every grid point failed to produce a mode");

  // One coordinate-descent refinement pass at half step.
  std::vector<SweepPoint> all(evaluated);
  if (spec.refine) {
    const double half[3] = {spec.w.step_nm / 2.0, spec.h.step_nm / 2.0,
                            spec.t.step_nm / 2.0};
    const Range* ranges[3] = {&spec.w, &spec.h, &spec.t};
    for (int axis = 0; axis < 3; ++axis) {
      for (double sign : {-1.0, +1.0}) {
        double w = best.w_nm, h = best.h_nm, t = best.t_nm;
        double* coord = axis == 0 ? &w : axis == 1 ? &h : &t;
        *coord += sign * half[axis];
        if (*coord < ranges[axis]->min_nm - 1e-9 ||
            *coord > ranges[axis]->max_nm + 1e-9)
          continue;
        SweepPoint p;
        if (!journal.lookup(index, &p)) {
          p = detail::evaluate_point(spec, index, w, h, t);
          journal.record(p);
        }
        ++index;
        all.push_back(p);
        if (p.ok && detail::better_than(p, best)) best = p;
      }
    }
  }

  // Re-evaluate the winner to attach its mode (and confirm reproducibility).
  SweepResult result;
  Mode best_mode;
  SweepPoint confirm = detail::evaluate_point(spec, best.index, best.w_nm,
                                              best.h_nm, best.t_nm, &best_mode);
  if (!confirm.ok)
    throw SolverError("sweep: optimum failed on re-evaluation: " +
                      confirm.error);
  result.best = confirm;
  result.best_mode = std::make_shared<const Mode>(std::move(best_mode));
  result.evaluated = std::move(all);
  std::sort(result.evaluated.begin(), result.evaluated.end(),
            [](const SweepPoint& a, const SweepPoint& b) {
              return a.index < b.index;
            });
  result.objective_lambda_nm = spec.band.center_nm();
  result.dx_nm = spec.dx_nm;
  result.dy_nm = spec.dy_nm;
  result.padding_nm = spec.padding_nm;
  result.solver = spec.solver;
  return result;
}

struct MaterialTableRow {
  std::string material;
  std::string band;
  double beta = 0;
  double f_p = 0;
  double f_wg = 0;
  SweepPoint best;
  std::string loss_note;
};

/// One optimize_geometry per (material, band) cell. Loss annotations ride
/// along as metadata.
inline std::vector<MaterialTableRow> material_comparison(
    const std::vector<Band>& bands, const std::vector<MaterialModel>& materials,
    const SweepSpec& base) {
  std::vector<MaterialTableRow> table;
  for (const auto& band : bands) {
    for (const auto& mat : materials) {
      SweepSpec spec = base;
      spec.rail_material = mat;
      spec.band = band;
      if (spec.journal_path)
        spec.journal_path = spec.journal_path->parent_path() /
                            (spec.journal_path->filename().string() + "." +
                             mat.name() + "." + band.name);
      SweepResult r = optimize_geometry(spec);
      MaterialTableRow row;
      row.material = mat.name();
      row.band = band.name;
      row.beta = r.best.beta;
      row.f_p = r.best.f_p;
      row.f_wg = r.best.f_wg;
      row.best = r.best;
      row.loss_note = mat.loss_note();
      table.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace slotwg
