#pragma once

// Experiment drivers behind the command-line tool. Each command renders one
// or more named CSV documents into an Outputs map; the tool writes them to
// the output directory.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "sde_gridopt/asymptotics.hpp"
#include "sde_gridopt/cli/config.hpp"
#include "sde_gridopt/csv.hpp"
#include "sde_gridopt/grid.hpp"
#include "sde_gridopt/solver.hpp"

namespace sde_gridopt::cli {

/// File name -> CSV contents.
using Outputs = std::map<std::string, std::string>;

/// Density behind the configured grid kind; empty for file grids.
inline std::optional<GridDensity> configured_density(const ExperimentConfig& cfg,
                                                     const WeightCurves& curves) {
  switch (cfg.grid_kind) {
    case GridKind::uniform: return uniform_density(cfg.model.horizon(), cfg.panels);
    case GridKind::terminal_optimal: return optimal_profile(cfg.model, curves, WeightKind::terminal);
    case GridKind::integral_optimal: return optimal_profile(cfg.model, curves, WeightKind::integral);
    case GridKind::file: return std::nullopt;
  }
  return std::nullopt;
}

inline TimeGrid load_grid_file(const ExperimentConfig& cfg) {
  std::ifstream is(cfg.grid_file);
  detail::require(static_cast<bool>(is), ErrorKind::io, "cannot open grid file " + cfg.grid_file);
  TimeGrid grid = read_grid_csv(is);
  detail::require(grid.horizon() == cfg.model.horizon(), ErrorKind::invalid_input,
                  "grid file does not end at the model horizon");
  return grid;
}

inline TimeGrid configured_grid(const ExperimentConfig& cfg, const std::optional<GridDensity>& density,
                                std::size_t n) {
  if (cfg.grid_kind == GridKind::file) return load_grid_file(cfg);
  if (cfg.grid_kind == GridKind::uniform) return uniform_grid(cfg.model.horizon(), n);
  return grid_from_density(*density, n);
}

/// G_t, Q_t, K_t, F_t, S_t tabulated on the density mesh.
inline Outputs cmd_gramian(const ExperimentConfig& cfg) {
  const LinearSdeModel& model = cfg.model;
  const WeightCurves curves = weight_curves(model, cfg.panels);
  const Eigen::Index n = model.state_dim();
  const Matrix& a = model.dynamics();

  std::ostringstream os;
  csv::Writer w(os);
  w.cell("t");
  for (const char* name : {"G", "Q", "K"})
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        w.cell(std::string(name) + "_" + std::to_string(i + 1) + std::to_string(j + 1));
  w.cell("F").cell("S").end_row();

  for (std::size_t k = 0; k < curves.t.size(); ++k) {
    const double t = curves.t[k];
    w.cell(t);
    for (const Matrix& mat : {ctrl_gramian(a, model.diffusion(), t), obs_gramian(a, model.weight(), t),
                              kt_matrix(a, model.diffusion(), t)})
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) w.cell(mat(i, j));
    w.cell(curves.f[k]).cell(curves.s[k]).end_row();
  }

  std::ostringstream weights;
  curves.write_csv(weights);
  return {{"gramian.csv", os.str()}, {"weights.csv", weights.str()}};
}

/// N, T_N, I_N, N^2 T_N, N^2 I_N over the N-sweep, followed by a `limit` row
/// holding Phi(psi) and Ups(psi) in the rescaled columns.
inline Outputs cmd_convergence(const ExperimentConfig& cfg) {
  const LinearSdeModel& model = cfg.model;
  const WeightCurves curves = weight_curves(model, cfg.panels);
  const auto density = configured_density(cfg, curves);

  std::ostringstream os;
  csv::Writer w(os);
  write_error_header(w);
  std::optional<TimeGrid> last;
  if (cfg.grid_kind == GridKind::file) {
    last = load_grid_file(cfg);
    write_error_row(w, grid_error(model, *last));
  } else {
    for (std::size_t n : cfg.n_sweep) {
      last = configured_grid(cfg, density, n);
      write_error_row(w, grid_error(model, *last));
    }
  }

  Outputs out;
  if (density) {
    w.cell("limit").cell("").cell("");
    if (density->vanishes_at_terminal())
      w.cell("");
    else
      w.cell(phi_functional(curves, *density));
    w.cell(ups_functional(curves, *density)).end_row();

    std::ostringstream dens;
    density->write_csv(dens);
    out["density.csv"] = dens.str();
  }
  std::ostringstream grid;
  write_grid_csv(grid, *last);
  out["grid.csv"] = grid.str();
  out["convergence.csv"] = os.str();
  return out;
}

/// Monte Carlo check of the predicted mean-square errors, one row per N.
/// Terminal errors go to mc_verify.csv, integral errors to mc_verify_integral.csv.
inline Outputs cmd_mc_verify(const ExperimentConfig& cfg) {
  const LinearSdeModel& model = cfg.model;
  const WeightCurves curves = weight_curves(model, cfg.panels);
  const auto density = configured_density(cfg, curves);

  std::ostringstream term, integ;
  csv::Writer wt(term), wi(integ);
  for (csv::Writer* w : {&wt, &wi})
    w->cell("N").cell("sample_mse").cell("predicted").cell("stderr").cell("zscore").end_row();

  const auto emit = [&](const TimeGrid& grid) {
    const McReport r = mc_verify_mse(model, grid, cfg.x0, cfg.paths, cfg.seed);
    wt.cell(r.n).cell(r.terminal.sample).cell(r.terminal.predicted).cell(r.terminal.std_error)
        .cell(r.terminal.zscore()).end_row();
    wi.cell(r.n).cell(r.integral.sample).cell(r.integral.predicted).cell(r.integral.std_error)
        .cell(r.integral.zscore()).end_row();
    return grid;
  };

  std::optional<TimeGrid> last;
  if (cfg.grid_kind == GridKind::file) {
    last = emit(load_grid_file(cfg));
  } else {
    for (std::size_t n : cfg.n_sweep) last = emit(configured_grid(cfg, density, n));
  }

  // Path 0 of the last grid, filtered, as a worked trajectory.
  const PathSample path = sample_exact_path(model, *last, cfg.x0, cfg.seed, 0);
  const FilterResult filtered = run_filter(model, *last, cfg.x0, path.increments);
  std::ostringstream traj;
  write_trajectory_csv(traj, *last, filtered.trajectory);

  return {{"mc_verify.csv", term.str()},
          {"mc_verify_integral.csv", integ.str()},
          {"trajectory.csv", traj.str()}};
}

/// Analytic versus quadrature values of the scalar OU optimal-grid advantage.
inline Outputs cmd_ou_table(const ExperimentConfig& cfg) {
  std::vector<double> horizons = cfg.t_sweep;
  if (horizons.empty()) horizons.push_back(cfg.model.horizon());

  std::ostringstream os;
  csv::Writer w(os);
  w.cell("T").cell("min_phi").cell("min_phi_quadrature").cell("phi_uniform")
      .cell("phi_uniform_quadrature").cell("ratio").cell("ratio_quadrature").cell("asymptote")
      .cell("ratio_over_asymptote").end_row();
  for (double horizon : horizons) {
    const LinearSdeModel model = cfg.model.with_horizon(horizon);
    const OuClosedForms c = ou_closed_forms(model);
    const WeightCurves curves = weight_curves(model, cfg.panels);
    const double min_q = min_phi_value(model, curves);
    const double uni_q = phi_functional(curves, uniform_density(horizon, cfg.panels));
    w.cell(horizon).cell(c.min_phi).cell(min_q).cell(c.phi_uniform).cell(uni_q).cell(c.ratio)
        .cell(uni_q / min_q).cell(c.ratio_asymptote).cell(c.ratio / c.ratio_asymptote).end_row();
  }
  return {{"ou_table.csv", os.str()}};
}

}  // namespace sde_gridopt::cli
