// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// slotwg command line: solve | coupling | sweep | cqed. Every command reads
// one config file, writes machine-readable results under the output
// directory and stamps them with the toolkit version and the config hash.
// Exit codes: 0 success, 2 config error, 3 solver/runtime failure.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <string>

#include "slotwg/config.hpp"
#include "slotwg/coupling.hpp"
#include "slotwg/cqed.hpp"
#include "slotwg/errors.hpp"
#include "slotwg/geometry.hpp"
#include "slotwg/materials.hpp"
#include "slotwg/modesolver.hpp"
#include "slotwg/output.hpp"
#include "slotwg/sweep.hpp"
#include "slotwg/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliArgs {
  std::string config_path;
  std::string out_dir = "out";
  bool out_dir_set = false;
  int threads = 2;
  bool dump_fields = false;
};

struct RunContext {
  slotwg::RunConfig config;
  slotwg::MaterialDb db;
  fs::path out_dir;
  bool dump_fields = false;
  int threads = 1;
};

slotwg::MaterialDb load_db(const slotwg::RunConfig& cfg) {
  std::string path;
  if (auto p = cfg.materials_db()) {
    path = *p;
  } else if (const char* env = std::getenv("SLOTWG_MATERIALS_DB")) {
    path = env;
  } else {
    path = SLOTWG_DEFAULT_MATERIALS_DB;
  }
  return slotwg::MaterialDb::load(path);
}

RunContext make_context(const CliArgs& args) {
  slotwg::RunConfig cfg = slotwg::RunConfig::parse_file(args.config_path);
  slotwg::MaterialDb db = load_db(cfg);
  auto out = cfg.output();
  RunContext ctx{std::move(cfg), std::move(db),
                 fs::path(args.out_dir_set ? args.out_dir : out.directory),
                 args.dump_fields || out.dump_fields, args.threads};
  fs::create_directories(ctx.out_dir);
  return ctx;
}

json metadata(const RunContext& ctx) {
  return json{{"toolkit_version", slotwg::kVersion},
              {"config_hash", ctx.config.config_hash()},
              {"config", ctx.config.canonical_text()}};
}

void write_json(const RunContext& ctx, const std::string& name,
                const json& j) {
  slotwg::write_file_atomic(ctx.out_dir / name, j.dump(2) + "\n");
}

json mode_to_json(const slotwg::Mode& m, int id) {
  json j{{"mode_id", id},
         {"lambda_nm", m.lambda_nm},
         {"n_eff", m.n_eff},
         {"pol_fraction_y", m.pol_fraction_y},
         {"gamma_slot", m.gamma_slot},
         {"residual", m.residual}};
  if (std::isfinite(m.n_g)) j["n_g"] = m.n_g;
  return j;
}

// ---- solve ---------------------------------------------------------------

int cmd_solve(const RunContext& ctx) {
  const auto solve_cfg = ctx.config.solve();
  const auto grid_cfg = ctx.config.grid();
  const slotwg::CrossSection cs = ctx.config.geometry(ctx.db);
  const slotwg::Grid2D grid =
      slotwg::Grid2D::make(cs, grid_cfg.dx_nm, grid_cfg.dy_nm,
                           grid_cfg.padding_nm);

  slotwg::SolveRequest req;
  req.map = slotwg::rasterize(cs, grid, solve_cfg.lambda_nm);
  req.lambda_nm = solve_cfg.lambda_nm;
  req.options = solve_cfg.options;
  auto modes = slotwg::solve_modes(req);
  for (size_t k = 0; k < modes.size() && solve_cfg.compute_group_index; ++k)
    modes[k].n_g =
        slotwg::group_index(req, modes[k], solve_cfg.group_index_delta_nm);

  json j = metadata(ctx);
  j["lambda_nm"] = solve_cfg.lambda_nm;
  j["grid"] = {{"dx_nm", grid.dx_nm},
               {"dy_nm", grid.dy_nm},
               {"nx", grid.nx},
               {"ny", grid.ny},
               {"padding_nm", grid.padding_nm}};
  j["modes"] = json::array();
  for (size_t k = 0; k < modes.size(); ++k)
    j["modes"].push_back(mode_to_json(modes[k], static_cast<int>(k)));
  write_json(ctx, "modes.json", j);

  if (ctx.dump_fields) {
    for (size_t k = 0; k < modes.size(); ++k)
      slotwg::write_file_atomic(
          ctx.out_dir / ("fields_mode" + std::to_string(k) + ".bin"),
          slotwg::field_dump_bytes(modes[k]));
  }
  std::cout << "solve: " << modes.size() << " guided mode(s) -> "
            << (ctx.out_dir / "modes.json").string() << "\n";
  return 0;
}

// ---- coupling --------------------------------------------------------------

int cmd_coupling(const RunContext& ctx) {
  const auto cpl = ctx.config.coupling();
  const auto grid_cfg = ctx.config.grid();
  const auto solve_cfg = ctx.config.solve();
  const slotwg::CrossSection cs = ctx.config.geometry(ctx.db);

  json summary = metadata(ctx);
  summary["runs"] = json::array();
  for (double lambda : cpl.lambdas_nm) {
    auto ev = slotwg::evaluate_slot_geometry(
        cs, grid_cfg.dx_nm, grid_cfg.dy_nm, grid_cfg.padding_nm, lambda,
        solve_cfg.options, cpl.f_bg);
    const slotwg::Mode& mode = ev.mode;
    const auto [x0, y0] = slotwg::displacement_to_coords(cs, 0.0);

    json run;
    run["lambda_nm"] = lambda;
    run["mode"] = mode_to_json(mode, ev.mode_index);
    run["orientation_table"] = json::array();
    for (char axis : cpl.orientations) {
      slotwg::DipoleSpec dip{x0, y0, slotwg::axis_orientation(axis), lambda};
      auto r = slotwg::coupling_at(mode, dip, cpl.f_bg, ev.mode_index);
      run["orientation_table"].push_back(json{{"orientation",
                                               std::string(1, axis)},
                                              {"F_wg", r.f_wg},
                                              {"beta", r.beta},
                                              {"F_P", r.f_p}});
    }

    auto rows = slotwg::displacement_sweep(
        mode, cs, cpl.u_samples,
        slotwg::axis_orientation(cpl.sweep_orientation), cpl.f_bg,
        ev.mode_index);
    const std::string csv_name =
        "displacement_" + std::to_string(static_cast<int>(lambda)) + "nm.csv";
    slotwg::write_file_atomic(ctx.out_dir / csv_name,
                              slotwg::coupling_sweep_csv(rows, cs, lambda));
    run["displacement_csv"] = csv_name;
    summary["runs"].push_back(run);

    if (ctx.dump_fields)
      slotwg::write_file_atomic(
          ctx.out_dir /
              ("fields_" + std::to_string(static_cast<int>(lambda)) + "nm.bin"),
          slotwg::field_dump_bytes(mode));
  }
  write_json(ctx, "coupling.json", summary);
  std::cout << "coupling: " << cpl.lambdas_nm.size() << " wavelength(s) -> "
            << (ctx.out_dir / "coupling.json").string() << "\n";
  return 0;
}

// ---- sweep -----------------------------------------------------------------

int cmd_sweep(const RunContext& ctx) {
  const auto sw = ctx.config.sweep();
  const auto grid_cfg = ctx.config.grid();
  const slotwg::CrossSection base_cs = ctx.config.geometry(ctx.db);

  slotwg::SweepSpec spec;
  spec.slot_material = base_cs.slot_material;
  spec.substrate_material = base_cs.substrate_material;
  spec.cladding_material = base_cs.cladding_material;
  spec.monolayer_y_offset_nm = base_cs.monolayer_y_offset_nm;
  spec.w = sw.w;
  spec.h = sw.h;
  spec.t = sw.t;
  spec.dx_nm = grid_cfg.dx_nm;
  spec.dy_nm = grid_cfg.dy_nm;
  spec.padding_nm = grid_cfg.padding_nm;
  spec.solver.n_modes = sw.n_modes;
  spec.refine = sw.refine;
  spec.threads = ctx.threads;

  std::vector<slotwg::Band> bands;
  for (const auto& b : sw.bands) bands.push_back(slotwg::Band::by_name(b));
  std::vector<slotwg::MaterialModel> mats;
  for (const auto& m : sw.materials) mats.push_back(ctx.db.get(m));

  json summary = metadata(ctx);
  summary["table"] = json::array();
  std::vector<slotwg::SweepPoint> all_points;
  for (const auto& band : bands) {
    for (const auto& mat : mats) {
      slotwg::SweepSpec cell = spec;
      cell.rail_material = mat;
      cell.band = band;
      if (sw.journal)
        cell.journal_path =
            ctx.out_dir / ("journal_" + mat.name() + "_" + band.name + ".txt");
      slotwg::SweepResult r = slotwg::optimize_geometry(cell);
      slotwg::write_file_atomic(
          ctx.out_dir / ("sweep_" + mat.name() + "_" + band.name + ".csv"),
          slotwg::sweep_points_csv(r.evaluated));
      json row{{"material", mat.name()},
               {"band", band.name},
               {"lambda_nm", r.objective_lambda_nm},
               {"best",
                {{"w_nm", r.best.w_nm},
                 {"h_nm", r.best.h_nm},
                 {"t_slot_nm", r.best.t_nm},
                 {"beta", r.best.beta},
                 {"F_wg", r.best.f_wg},
                 {"F_P", r.best.f_p},
                 {"n_eff", r.best.n_eff},
                 {"n_g", r.best.n_g}}}};
      if (!mat.loss_note().empty()) row["loss_note"] = mat.loss_note();
      summary["table"].push_back(row);
      if (ctx.dump_fields && r.best_mode)
        slotwg::write_file_atomic(
            ctx.out_dir /
                ("fields_" + mat.name() + "_" + band.name + ".bin"),
            slotwg::field_dump_bytes(*r.best_mode));
    }
  }
  write_json(ctx, "sweep.json", summary);
  std::cout << "sweep: " << summary["table"].size() << " cell(s) -> "
            << (ctx.out_dir / "sweep.json").string() << "\n";
  return 0;
}

// ---- cqed ------------------------------------------------------------------

int cmd_cqed(const RunContext& ctx) {
  const auto c = ctx.config.cqed();
  const slotwg::CavityFigures fig =
      slotwg::cavity_figures(c.resonator, c.emitter);
  json j = metadata(ctx);
  j["kappa0_per_s"] = fig.kappa0_per_s;
  j["cooperativity"] = fig.cooperativity;
  j["inputs"] = {{"nu_fsr_hz", c.resonator.nu_fsr_hz},
                 {"lambda0_nm", c.resonator.lambda0_nm},
                 {"q0", c.resonator.q0},
                 {"beta", c.emitter.beta},
                 {"f_p", c.emitter.f_p},
                 {"n_emitters", c.emitter.n_emitters}};
  if (fig.g1_per_s) j["g1_per_s"] = *fig.g1_per_s;
  if (fig.g_n_per_s) j["g_n_per_s"] = *fig.g_n_per_s;
  if (fig.regime) j["regime"] = slotwg::to_string(*fig.regime);
  write_json(ctx, "cqed.json", j);
  std::cout << "cqed: C = " << fig.cooperativity << " -> "
            << (ctx.out_dir / "cqed.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slot-waveguide mode, emitter-coupling and cavity-QED toolkit"};
  app.require_subcommand(1);

  CliArgs args;
  app.add_option("--config", args.config_path, "run configuration file")
      ->required();
  auto* out_opt =
      app.add_option("--out", args.out_dir, "output directory override");
  app.add_option("--threads", args.threads, "sweep parallelism degree");
  app.add_flag("--dump-fields", args.dump_fields,
               "write binary field dumps for solved modes");

  auto* sub_solve = app.add_subcommand("solve", "guided modes of a geometry");
  auto* sub_coupling =
      app.add_subcommand("coupling", "dipole coupling tables and sweeps");
  auto* sub_sweep =
      app.add_subcommand("sweep", "geometry optimization per material/band");
  auto* sub_cqed =
      app.add_subcommand("cqed", "ring-resonator cavity-QED figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }
  args.out_dir_set = out_opt->count() > 0;

  try {
    RunContext ctx = make_context(args);
    if (sub_solve->parsed()) return cmd_solve(ctx);
    if (sub_coupling->parsed()) return cmd_coupling(ctx);
    if (sub_sweep->parsed()) return cmd_sweep(ctx);
    if (sub_cqed->parsed()) return cmd_cqed(ctx);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const slotwg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const slotwg::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
