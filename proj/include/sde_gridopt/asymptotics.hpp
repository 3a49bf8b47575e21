#pragma once

// Fine-grid limits of the error functionals and their optimal grid densities.
//
// For a grid density psi, N^2 T_N -> Phi(psi) = int F_t / psi(t)^2 dt and
// N^2 I_N -> Ups(psi) = int S_t / psi(t)^2 dt with F_t = <mho, R_{T-t}> and
// S_t = <mho, Q_{T-t}> = int_t^T F. By Hoelder's inequality with exponents
// (3, 3/2) the minima are (int F^{1/3})^3 and (int S^{1/3})^3, attained at
// psi proportional to F^{1/3} and S^{1/3} respectively.
//
// All mesh integrals use composite Simpson on the density mesh, the same rule
// GridDensity normalises with, so the discrete Hoelder bound holds exactly.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "sde_gridopt/csv.hpp"
#include "sde_gridopt/grid.hpp"
#include "sde_gridopt/matfun.hpp"
#include "sde_gridopt/model.hpp"

namespace sde_gridopt {

enum class WeightKind { terminal, integral };

inline std::string_view to_string(WeightKind kind) {
  return kind == WeightKind::terminal ? "terminal" : "integral";
}

namespace detail {

inline void require_in_horizon(const LinearSdeModel& model, double t, const char* what) {
  require(std::isfinite(t) && t >= 0.0 && t <= model.horizon(), ErrorKind::domain,
          std::string(what) + ": t outside [0,T]");
}

/// Composite Simpson over an even number of uniform panels.
inline double simpson(std::span<const double> f, double h) {
  require(f.size() >= 3 && (f.size() - 1) % 2 == 0, ErrorKind::invalid_input,
          "simpson: need an even number of panels");
  double s = f.front() + f.back();
  for (std::size_t j = 1; j + 1 < f.size(); ++j) s += (j % 2 ? 4.0 : 2.0) * f[j];
  return s * h / 3.0;
}

}  // namespace detail

/// F_t = <mho, R_{T-t}> = |sqrt(M) e^{(T-t)A} A B|_F^2 / 12.
inline double weight_F(const LinearSdeModel& model, double t) {
  detail::require_in_horizon(model, t, "weight_F");
  const Matrix& a = model.dynamics();
  return frobenius_pairing(mho(a, model.diffusion()),
                           weight_propagate(a, model.weight(), model.horizon() - t));
}

/// S_t = <mho, Q_{T-t}>.
inline double weight_S(const LinearSdeModel& model, double t) {
  detail::require_in_horizon(model, t, "weight_S");
  const Matrix& a = model.dynamics();
  return frobenius_pairing(mho(a, model.diffusion()),
                           obs_gramian(a, model.weight(), model.horizon() - t));
}

/// F and S sampled on the uniform J-panel mesh of [0, T].
struct WeightCurves {
  double horizon = 0.0;
  std::vector<double> t;
  std::vector<double> f;
  std::vector<double> s;

  std::size_t panels() const noexcept { return t.size() - 1; }
  double mesh_step() const noexcept { return horizon / double(panels()); }
  const std::vector<double>& of(WeightKind kind) const { return kind == WeightKind::terminal ? f : s; }

  void write_csv(std::ostream& os) const {
    csv::Writer w(os);
    w.cell("t").cell("F").cell("S").end_row();
    for (std::size_t j = 0; j < t.size(); ++j) w.cell(t[j]).cell(f[j]).cell(s[j]).end_row();
  }
};

inline WeightCurves weight_curves(const LinearSdeModel& model, std::size_t panels = kDefaultPanels) {
  validate_model(model);
  detail::require(panels >= 2 && panels % 2 == 0, ErrorKind::invalid_input,
                  "weight_curves: need an even number of panels");
  const double horizon = model.horizon();
  WeightCurves c;
  c.horizon = horizon;
  c.t.resize(panels + 1);
  c.f.resize(panels + 1);
  c.s.resize(panels + 1);
  const Matrix& a = model.dynamics();
  const Matrix omega = mho(a, model.diffusion());
  for (std::size_t j = 0; j <= panels; ++j) {
    const double t = j == panels ? horizon : horizon * double(j) / double(panels);
    const double lag = horizon - t;
    c.t[j] = t;
    c.f[j] = frobenius_pairing(omega, weight_propagate(a, model.weight(), lag));
    c.s[j] = frobenius_pairing(omega, obs_gramian(a, model.weight(), lag));
  }
  return c;
}

namespace detail {

inline void require_matching_mesh(const WeightCurves& curves, const GridDensity& density) {
  require(curves.panels() == density.panels() && curves.horizon == density.horizon(),
          ErrorKind::dimension_mismatch, "weight curves and density use different meshes");
}

}  // namespace detail

/// Phi(psi) = int_0^T F_t / psi(t)^2 dt. psi must be positive on all of [0, T].
inline double phi_functional(const WeightCurves& curves, const GridDensity& density) {
  detail::require_matching_mesh(curves, density);
  const auto psi = density.values();
  std::vector<double> integrand(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    detail::require(psi[j] > 0.0, ErrorKind::domain,
                    "phi_functional: density must be positive on [0,T]");
    integrand[j] = curves.f[j] / (psi[j] * psi[j]);
  }
  return detail::simpson(integrand, curves.mesh_step());
}

inline double phi_functional(const LinearSdeModel& model, const GridDensity& density) {
  return phi_functional(weight_curves(model, density.panels()), density);
}

/// Ups(psi) = int_0^T S_t / psi(t)^2 dt. psi may vanish only where S does
/// (at T); the integrand there is taken as its limit 0.
inline double ups_functional(const WeightCurves& curves, const GridDensity& density) {
  detail::require_matching_mesh(curves, density);
  const auto psi = density.values();
  std::vector<double> integrand(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    if (psi[j] > 0.0) {
      integrand[j] = curves.s[j] / (psi[j] * psi[j]);
    } else {
      detail::require(curves.s[j] == 0.0, ErrorKind::domain,
                      "ups_functional: density vanishes where S is positive");
      integrand[j] = 0.0;
    }
  }
  return detail::simpson(integrand, curves.mesh_step());
}

inline double ups_functional(const LinearSdeModel& model, const GridDensity& density) {
  return ups_functional(weight_curves(model, density.panels()), density);
}

namespace detail {

inline void require_regular(const LinearSdeModel& model) {
  require(regularity_check(model).satisfied, ErrorKind::regularity,
          "regularity condition det(<M, A^j D A'^k>) > 0 fails; no optimal grid");
}

inline double cube_root_integral(const std::vector<double>& w, double h) {
  std::vector<double> root(w.size());
  std::transform(w.begin(), w.end(), root.begin(), [](double v) { return std::cbrt(v); });
  return simpson(root, h);
}

}  // namespace detail

/// (int F^{1/3})^3.
inline double min_phi_value(const LinearSdeModel& model, const WeightCurves& curves) {
  detail::require_regular(model);
  const double c = detail::cube_root_integral(curves.f, curves.mesh_step());
  return c * c * c;
}

inline double min_phi_value(const LinearSdeModel& model, std::size_t panels = kDefaultPanels) {
  return min_phi_value(model, weight_curves(model, panels));
}

/// (int S^{1/3})^3.
inline double min_ups_value(const LinearSdeModel& model, const WeightCurves& curves) {
  detail::require_regular(model);
  const double c = detail::cube_root_integral(curves.s, curves.mesh_step());
  return c * c * c;
}

inline double min_ups_value(const LinearSdeModel& model, std::size_t panels = kDefaultPanels) {
  return min_ups_value(model, weight_curves(model, panels));
}

/// T^3 min_t F_t, a lower bound for Phi over all densities.
inline double phi_lower_bound(const WeightCurves& curves) {
  const double tmin = *std::min_element(curves.f.begin(), curves.f.end());
  return curves.horizon * curves.horizon * curves.horizon * tmin;
}

/// The 1/3-law density; its cumulative is the optimal phi^{-1}.
inline GridDensity optimal_profile(const LinearSdeModel& model, const WeightCurves& curves,
                                   WeightKind kind) {
  detail::require_regular(model);
  return density_from_weight(curves.horizon, std::span<const double>(curves.of(kind)));
}

inline GridDensity optimal_profile(const LinearSdeModel& model, WeightKind kind,
                                   std::size_t panels = kDefaultPanels) {
  return optimal_profile(model, weight_curves(model, panels), kind);
}

/// max(psi, eps), renormalised. Keeps Ups finite-grid meaningful for the
/// integral-optimal density, which vanishes at T.
inline GridDensity truncated_density(const GridDensity& density, double eps) {
  detail::require(eps > 0.0, ErrorKind::invalid_input, "truncated_density: eps must be positive");
  std::vector<double> v(density.values().begin(), density.values().end());
  for (double& x : v) x = std::max(x, eps);
  return GridDensity::from_samples(density.horizon(), std::move(v));
}

struct AsymptoticReport {
  WeightKind kind = WeightKind::terminal;
  double functional = 0.0;   // Phi(psi) or Ups(psi)
  double minimum = 0.0;      // (int w^{1/3})^3
  double lower_bound = 0.0;  // T^3 min F (terminal kind only, else 0)

  double ratio() const { return minimum > 0.0 ? functional / minimum : INFINITY; }
};

inline AsymptoticReport asymptotic_report(const LinearSdeModel& model, const WeightCurves& curves,
                                          const GridDensity& density, WeightKind kind) {
  AsymptoticReport r;
  r.kind = kind;
  if (kind == WeightKind::terminal) {
    r.functional = phi_functional(curves, density);
    r.minimum = min_phi_value(model, curves);
    r.lower_bound = phi_lower_bound(curves);
  } else {
    r.functional = ups_functional(curves, density);
    r.minimum = min_ups_value(model, curves);
  }
  return r;
}

inline void write_report_header(csv::Writer& w) {
  w.cell("kind").cell("functional").cell("minimum").cell("lower_bound").cell("ratio").end_row();
}

inline void write_report_row(csv::Writer& w, const AsymptoticReport& r) {
  w.cell(to_string(r.kind)).cell(r.functional).cell(r.minimum).cell(r.lower_bound).cell(r.ratio()).end_row();
}

// ---------------------------------------------------------------------------
// Limit covariance Sigma(tau) = lim N^2 Sigma_{floor(N tau)}

namespace detail {

inline void require_limit_args(const GridDensity& density, double tau) {
  require(std::isfinite(tau) && tau >= 0.0 && tau <= 1.0, ErrorKind::domain,
          "limit_sigma: tau outside [0,1]");
  require(!density.has_interior_zero(), ErrorKind::domain, "limit_sigma: density has interior zeros");
  require(!(tau == 1.0 && density.vanishes_at_terminal()), ErrorKind::domain,
          "limit_sigma: profile derivative diverges at tau = 1");
}

}  // namespace detail

/// Sigma(tau) from the Lyapunov ODE
///   Sigma' = phi' (A Sigma + Sigma A^T) + phi'^3 mho,  Sigma(0) = 0,
/// by classical RK4 with `steps` uniform steps on [0, tau].
inline Matrix limit_sigma_ode(const LinearSdeModel& model, const GridDensity& density, double tau,
                              std::size_t steps = kDefaultPanels) {
  detail::require_limit_args(density, tau);
  const Matrix& a = model.dynamics();
  const Matrix omega = mho(a, model.diffusion());
  const Eigen::Index n = model.state_dim();
  Matrix sigma = Matrix::Zero(n, n);
  if (tau == 0.0) return sigma;

  const auto rhs = [&](double v, const Matrix& x) -> Matrix {
    const double d = density.profile_derivative(v);
    return d * (a * x + x * a.transpose()) + d * d * d * omega;
  };
  const double h = tau / double(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double v = tau * double(i) / double(steps);
    const double v_end = i + 1 == steps ? tau : v + h;
    const Matrix k1 = rhs(v, sigma);
    const Matrix k2 = rhs(v + 0.5 * h, sigma + 0.5 * h * k1);
    const Matrix k3 = rhs(v + 0.5 * h, sigma + 0.5 * h * k2);
    const Matrix k4 = rhs(v_end, sigma + h * k3);
    sigma += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return symmetrize(sigma);
}

/// Sigma(tau) = int_0^tau e^{(phi(tau)-phi(v))A} mho e^{(phi(tau)-phi(v))A^T} phi'(v)^3 dv
/// by composite Simpson with `steps` (even) panels.
inline Matrix limit_sigma_integral(const LinearSdeModel& model, const GridDensity& density,
                                   double tau, std::size_t steps = kDefaultPanels) {
  detail::require_limit_args(density, tau);
  detail::require(steps >= 2 && steps % 2 == 0, ErrorKind::invalid_input,
                  "limit_sigma_integral: need an even number of panels");
  const Matrix& a = model.dynamics();
  const Matrix omega = mho(a, model.diffusion());
  const Eigen::Index n = model.state_dim();
  Matrix sum = Matrix::Zero(n, n);
  if (tau == 0.0) return sum;
  const double end = density.inverse_cumulative(tau);
  const double h = tau / double(steps);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double v = i == steps ? tau : tau * double(i) / double(steps);
    const double d = density.profile_derivative(v);
    const Matrix flow = mat_exp(a, end - density.inverse_cumulative(v));
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += (w * d * d * d) * (flow * omega * flow.transpose());
  }
  return symmetrize(sum * (h / 3.0));
}

inline Matrix limit_sigma(const LinearSdeModel& model, const GridDensity& density, double tau) {
  return limit_sigma_ode(model, density, tau);
}

// ---------------------------------------------------------------------------
// Scalar Ornstein-Uhlenbeck closed forms

struct OuClosedForms {
  double invariant_variance = 0.0;  // G_inf = -D / (2A)
  double min_phi = 0.0;             // (9/16) G_inf (1 - e^{2AT/3})^3
  double phi_uniform = 0.0;         // (1/12) G_inf (AT)^2 (1 - e^{2AT})
  double ratio = 0.0;               // phi_uniform / min_phi
  double ratio_asymptote = 0.0;     // (4/27) (AT)^2
};

inline OuClosedForms ou_closed_forms(const LinearSdeModel& model) {
  validate_model(model);
  detail::require(model.state_dim() == 1 && model.noise_dim() == 1, ErrorKind::invalid_input,
                  "ou_closed_forms: scalar model required");
  const double a = model.dynamics()(0, 0);
  const double d = model.diffusion()(0, 0);
  detail::require(a < 0.0 && d > 0.0 && model.weight()(0, 0) == 1.0, ErrorKind::invalid_input,
                  "ou_closed_forms: need A < 0, B != 0, M = 1");
  const double at = a * model.horizon();
  OuClosedForms c;
  c.invariant_variance = -d / (2.0 * a);
  // 1 - e^x via expm1 to keep small horizons accurate.
  const double one_minus_third = -std::expm1(2.0 * at / 3.0);
  const double one_minus_full = -std::expm1(2.0 * at);
  c.min_phi = 9.0 / 16.0 * c.invariant_variance * std::pow(one_minus_third, 3);
  c.phi_uniform = c.invariant_variance * at * at * one_minus_full / 12.0;
  c.ratio = 4.0 / 27.0 * at * at * one_minus_full / std::pow(one_minus_third, 3);
  c.ratio_asymptote = 4.0 / 27.0 * at * at;
  return c;
}

}  // namespace sde_gridopt
