#pragma once

// Grid densities psi on [0, T] and the time grids t_k = phi(k/N) they
// generate through the inverse profile phi^{-1}(t) = int_0^t psi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sde_gridopt/csv.hpp"
#include "sde_gridopt/error.hpp"

namespace sde_gridopt {

inline constexpr std::size_t kDefaultPanels = 4096;

/// Strictly increasing points 0 = t_0 < ... < t_N = T.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    detail::require(points_.size() >= 2, ErrorKind::invalid_input, "time grid needs N >= 1");
    detail::require(points_.front() == 0.0, ErrorKind::invalid_input, "time grid must start at 0");
    steps_.resize(points_.size() - 1);
    for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
      detail::require(std::isfinite(points_[k + 1]) && points_[k + 1] > points_[k],
                      ErrorKind::invalid_input, "time grid must be strictly increasing");
      steps_[k] = points_[k + 1] - points_[k];
    }
  }

  std::size_t size() const noexcept { return steps_.size(); }  // N
  double horizon() const noexcept { return points_.back(); }
  double operator[](std::size_t k) const { return points_[k]; }
  double step(std::size_t k) const { return steps_[k]; }
  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> steps() const noexcept { return steps_; }

 private:
  std::vector<double> points_;
  std::vector<double> steps_;
};

/// t_k = k T / N.
inline TimeGrid uniform_grid(double horizon, std::size_t n) {
  detail::require(horizon > 0.0 && std::isfinite(horizon), ErrorKind::invalid_input,
                  "uniform_grid: horizon must be positive");
  detail::require(n >= 1, ErrorKind::invalid_input, "uniform_grid: N >= 1");
  std::vector<double> pts(n + 1);
  for (std::size_t k = 0; k < n; ++k) pts[k] = horizon * double(k) / double(n);
  pts[n] = horizon;
  return TimeGrid(std::move(pts));
}

/// Normalised grid density on a uniform mesh of J (even) panels over [0, T].
///
/// psi is linear between mesh nodes. Normalisation uses composite Simpson so
/// that every mesh integral in the library sees int psi = 1 under the same
/// rule; the cumulative Psi splits each Simpson panel pair between its two
/// halves with the local quadratic interpolant and is pinned to 0 and 1 at
/// the endpoints. Between nodes Psi follows the integral of the linear psi,
/// rescaled per panel to the stored node increments.
class GridDensity {
 public:
  /// Builds from samples at s_j = j T / J, j = 0..J. Values are rescaled to unit integral.
  static GridDensity from_samples(double horizon, std::vector<double> values) {
    detail::require(std::isfinite(horizon) && horizon > 0.0, ErrorKind::invalid_input,
                    "density: horizon must be positive");
    detail::require(values.size() >= 3 && (values.size() - 1) % 2 == 0, ErrorKind::invalid_input,
                    "density: need an even number of panels");
    bool any_positive = false;
    for (double v : values) {
      detail::require(std::isfinite(v) && v >= 0.0, ErrorKind::invalid_input,
                      "density: samples must be finite and nonnegative");
      any_positive = any_positive || v > 0.0;
    }
    detail::require(any_positive, ErrorKind::invalid_input, "density: all-zero weight");
    return GridDensity(horizon, std::move(values));
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t panels() const noexcept { return values_.size() - 1; }
  double mesh_step() const noexcept { return horizon_ / double(panels()); }
  double node(std::size_t j) const noexcept {
    return j == panels() ? horizon_ : horizon_ * double(j) / double(panels());
  }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  /// True when psi vanishes at some node other than the terminal one.
  bool has_interior_zero() const noexcept {
    return std::any_of(values_.begin(), values_.end() - 1, [](double v) { return v <= 0.0; });
  }
  bool vanishes_at_terminal() const noexcept { return values_.back() <= 0.0; }

  /// psi(t) by linear interpolation.
  double operator()(double t) const {
    const auto [j, x] = locate(t);
    const double h = mesh_step();
    return values_[j] + (values_[j + 1] - values_[j]) * (x / h);
  }

  /// Psi(t) = int_0^t psi.
  double cumulative_at(double t) const {
    if (t >= horizon_) return 1.0;
    if (t <= 0.0) return 0.0;
    const auto [j, x] = locate(t);
    const double h = mesh_step();
    const double lin = values_[j] * x + (values_[j + 1] - values_[j]) * x * x / (2.0 * h);
    return cumulative_[j] + scale_[j] * lin;
  }

  /// phi(u) = Psi^{-1}(u) for u in [0, 1]; endpoints map exactly to 0 and T.
  double inverse_cumulative(double u) const {
    detail::require(u >= 0.0 && u <= 1.0, ErrorKind::domain, "inverse_cumulative: u outside [0,1]");
    if (u == 0.0) return 0.0;
    if (u == 1.0) return horizon_;
    // Bisection over the node cumulative brackets the panel.
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t j = std::min<std::size_t>(std::size_t(it - cumulative_.begin()) - 1, panels() - 1);
    const double h = mesh_step();
    const double r = (u - cumulative_[j]) / scale_[j];
    const double b = values_[j];
    const double a = (values_[j + 1] - values_[j]) / (2.0 * h);
    const double disc = b * b + 4.0 * a * r;
    detail::require(b > 0.0 || a > 0.0, ErrorKind::domain,
                    "density vanishes on a panel; profile not invertible");
    const double x = 2.0 * r / (b + std::sqrt(std::max(disc, 0.0)));
    return std::clamp(node(j) + std::min(x, h), 0.0, horizon_);
  }

  /// phi'(tau) = 1 / psi(phi(tau)); infinite where psi vanishes.
  double profile_derivative(double tau) const {
    const double t = inverse_cumulative(tau);
    const auto [j, x] = locate(t);
    const double h = mesh_step();
    const double psi = scale_[j] * (values_[j] + (values_[j + 1] - values_[j]) * (x / h));
    return 1.0 / psi;
  }

  void write_csv(std::ostream& os) const {
    csv::Writer w(os);
    w.cell("t").cell("psi").end_row();
    for (std::size_t j = 0; j <= panels(); ++j) w.cell(node(j)).cell(values_[j]).end_row();
  }

 private:
  GridDensity(double horizon, std::vector<double> values)
      : horizon_(horizon), values_(std::move(values)) {
    const std::size_t J = panels();
    const double h = mesh_step();

    double total = 0.0;
    for (std::size_t j = 0; j + 2 <= J; j += 2)
      total += values_[j] + 4.0 * values_[j + 1] + values_[j + 2];
    total *= h / 3.0;
    for (double& v : values_) v /= total;

    cumulative_.assign(J + 1, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j + 2 <= J; j += 2) {
      const double f0 = values_[j], f1 = values_[j + 1], f2 = values_[j + 2];
      const double pair = h / 3.0 * (f0 + 4.0 * f1 + f2);
      double first = h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
      double second = h / 12.0 * (-f0 + 8.0 * f1 + 5.0 * f2);
      if (!(first > 0.0 && second > 0.0)) {
        // Quadratic interpolant dips below zero; split by trapezoid shares.
        const double t0 = f0 + f1, t1 = f1 + f2;
        first = (t0 + t1) > 0.0 ? pair * t0 / (t0 + t1) : 0.0;
        second = pair - first;
      }
      cumulative_[j + 1] = acc + first;
      acc += pair;
      cumulative_[j + 2] = acc;
    }
    // acc equals 1 up to rounding; pin it.
    for (double& c : cumulative_) c /= acc;
    cumulative_[0] = 0.0;
    cumulative_[J] = 1.0;

    scale_.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
      const double trap = 0.5 * h * (values_[j] + values_[j + 1]);
      const double inc = cumulative_[j + 1] - cumulative_[j];
      scale_[j] = trap > 0.0 ? inc / trap : 1.0;
    }
  }

  std::pair<std::size_t, double> locate(double t) const {
    detail::require(t >= 0.0 && t <= horizon_, ErrorKind::domain, "density: t outside [0,T]");
    const std::size_t J = panels();
    const double h = mesh_step();
    std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(t / h), J - 1);
    return {j, t - node(j)};
  }

  double horizon_;
  std::vector<double> values_;
  std::vector<double> cumulative_;
  std::vector<double> scale_;  // per-panel Psi increment / trapezoid of psi
};

/// psi = 1/T.
inline GridDensity uniform_density(double horizon, std::size_t panels = kDefaultPanels) {
  detail::require(std::isfinite(horizon) && horizon > 0.0, ErrorKind::invalid_input,
                  "uniform_density: T must be positive");
  return GridDensity::from_samples(horizon, std::vector<double>(panels + 1, 1.0 / horizon));
}

/// psi proportional to w^{1/3}, w sampled on the J-panel mesh.
inline GridDensity density_from_weight(double horizon, std::span<const double> weight) {
  std::vector<double> root(weight.size());
  for (std::size_t j = 0; j < weight.size(); ++j) {
    detail::require(std::isfinite(weight[j]) && weight[j] >= 0.0, ErrorKind::invalid_input,
                    "density_from_weight: weight must be finite and nonnegative");
    root[j] = std::cbrt(weight[j]);
  }
  return GridDensity::from_samples(horizon, std::move(root));
}

template <class Fn>
GridDensity density_from_weight(double horizon, Fn&& weight, std::size_t panels = kDefaultPanels) {
  detail::require(std::isfinite(horizon) && horizon > 0.0, ErrorKind::invalid_input,
                  "density_from_weight: T must be positive");
  std::vector<double> w(panels + 1);
  for (std::size_t j = 0; j <= panels; ++j)
    w[j] = weight(j == panels ? horizon : horizon * double(j) / double(panels));
  return density_from_weight(horizon, std::span<const double>(w));
}

/// t_k = phi(k/N), endpoints pinned to 0 and T.
inline TimeGrid grid_from_density(const GridDensity& density, std::size_t n) {
  detail::require(n >= 1, ErrorKind::invalid_input, "grid_from_density: N >= 1");
  detail::require(!density.has_interior_zero(), ErrorKind::domain,
                  "grid_from_density: density has interior zeros");
  std::vector<double> pts(n + 1);
  pts[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) pts[k] = density.inverse_cumulative(double(k) / double(n));
  pts[n] = density.horizon();
  return TimeGrid(std::move(pts));
}

/// #{k : t_k in [lo, hi]} / N.
inline double empirical_density(const TimeGrid& grid, double lo, double hi) {
  detail::require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, ErrorKind::invalid_input,
                  "empirical_density: malformed window");
  detail::require(lo >= 0.0 && hi <= grid.horizon(), ErrorKind::domain,
                  "empirical_density: window outside [0,T]");
  const auto pts = grid.points();
  const auto first = std::lower_bound(pts.begin(), pts.end(), lo);
  const auto last = std::upper_bound(pts.begin(), pts.end(), hi);
  return double(last - first) / double(grid.size());
}

inline void write_grid_csv(std::ostream& os, const TimeGrid& grid) {
  csv::Writer w(os);
  w.cell("t").end_row();
  for (double t : grid.points()) w.cell(t).end_row();
}

/// Reads a single-column CSV with header `t`.
inline TimeGrid read_grid_csv(std::istream& is) {
  std::string line;
  detail::require(static_cast<bool>(std::getline(is, line)), ErrorKind::parse, "grid csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  detail::require(line == "t", ErrorKind::parse, "grid csv: expected header 't'");
  std::vector<double> pts;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse, "grid csv: bad value '" + line + "'");
    }
    detail::require(used == line.size(), ErrorKind::parse, "grid csv: bad value '" + line + "'");
    pts.push_back(v);
  }
  return TimeGrid(std::move(pts));
}

}  // namespace sde_gridopt
