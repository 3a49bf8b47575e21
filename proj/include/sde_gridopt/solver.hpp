#pragma once

// Mean-square optimal integration of dX = A X dt + B dW from the Wiener
// increments alone. The conditional law of X given the increments is
// Gaussian, so the estimate is a Kalman filter whose covariance recursion
// is deterministic:
//
//   mu_k    = e^{A dt_k} mu_{k-1} + E(A dt_k) B dW_k
//   Sigma_k = e^{A dt_k} Sigma_{k-1} e^{A^T dt_k} + K_{dt_k} dt_k^3
//
// started from mu_{-1} = X_0, Sigma_{-1} = 0. Exact paths are generated
// jointly with the increments so the estimation error can be measured.

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "sde_gridopt/csv.hpp"
#include "sde_gridopt/grid.hpp"
#include "sde_gridopt/matfun.hpp"
#include "sde_gridopt/model.hpp"
#include "sde_gridopt/rng.hpp"

namespace sde_gridopt {

// ---------------------------------------------------------------------------
// Per-step matrices

struct StepMatrices {
  double dt = 0.0;
  Matrix flow;        // e^{A dt}
  Matrix gain;        // E(A dt) B
  Matrix resid_cov;   // K_dt dt^3 = cov(Z | dW)
  Matrix resid_root;  // symmetric square root of resid_cov
};

inline StepMatrices step_matrices(const LinearSdeModel& model, double dt) {
  detail::require(std::isfinite(dt) && dt > 0.0, ErrorKind::domain, "step: dt must be positive");
  const Matrix& a = model.dynamics();
  StepMatrices s;
  s.dt = dt;
  s.flow = mat_exp(a, dt);
  s.gain = phi1(a, dt) * model.dispersion();
  s.resid_cov = kt_matrix(a, model.diffusion(), dt) * (dt * dt * dt);
  s.resid_root = psd_sqrt(s.resid_cov);
  return s;
}

/// Step matrices for every step of a grid, computed once per distinct step length.
class StepTable {
 public:
  StepTable(const LinearSdeModel& model, const TimeGrid& grid) : index_(grid.size()) {
    std::map<double, std::size_t> seen;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double dt = grid.step(k);
      auto [it, inserted] = seen.try_emplace(dt, entries_.size());
      if (inserted) entries_.push_back(step_matrices(model, dt));
      index_[k] = it->second;
    }
  }

  const StepMatrices& operator[](std::size_t k) const { return entries_[index_[k]]; }
  std::size_t size() const noexcept { return index_.size(); }
  std::size_t distinct() const noexcept { return entries_.size(); }

 private:
  std::vector<StepMatrices> entries_;
  std::vector<std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Sampling

struct JointIncrement {
  Vector dw;  // in R^m, ~ N(0, I dt)
  Vector z;   // in R^n, exact transition noise over the step
};

template <class Rng>
Vector standard_normal(Eigen::Index dim, Rng& rng) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
  return v;
}

/// dW ~ N(0, I dt); Z | dW ~ N(E(A dt) B dW, K_dt dt^3).
template <class Rng>
JointIncrement sample_joint_increment(const StepMatrices& step, Rng& rng) {
  JointIncrement out;
  out.dw = std::sqrt(step.dt) * standard_normal(step.gain.cols(), rng);
  out.z = step.gain * out.dw + step.resid_root * standard_normal(step.flow.rows(), rng);
  return out;
}

template <class Rng>
JointIncrement sample_joint_increment(const LinearSdeModel& model, double dt, Rng& rng) {
  return sample_joint_increment(step_matrices(model, dt), rng);
}

using WienerIncrements = std::vector<Vector>;

struct PathSample {
  std::vector<Vector> states;  // X at t_0..t_N
  WienerIncrements increments; // dW_0..dW_{N-1}
};

/// Exact path; step k draws from the counter stream (seed, path, k).
inline PathSample sample_exact_path(const StepTable& steps, const Vector& x0, std::uint64_t seed,
                                    std::uint64_t path) {
  PathSample out;
  out.states.reserve(steps.size() + 1);
  out.increments.reserve(steps.size());
  out.states.push_back(x0);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    CounterRng rng(seed, path, static_cast<std::uint32_t>(k));
    const StepMatrices& s = steps[k];
    JointIncrement inc = sample_joint_increment(s, rng);
    out.states.push_back(s.flow * out.states.back() + inc.z);
    out.increments.push_back(std::move(inc.dw));
  }
  return out;
}

inline PathSample sample_exact_path(const LinearSdeModel& model, const TimeGrid& grid,
                                    const Vector& x0, std::uint64_t seed, std::uint64_t path = 0) {
  detail::require(x0.size() == model.state_dim(), ErrorKind::dimension_mismatch,
                  "sample_exact_path: X0 dimension");
  return sample_exact_path(StepTable(model, grid), x0, seed, path);
}

/// Independent N(0, I dt_k) increments from streams (seed, path, k).
inline WienerIncrements sample_increments(const TimeGrid& grid, Eigen::Index noise_dim,
                                          std::uint64_t seed, std::uint64_t path = 0) {
  WienerIncrements out;
  out.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CounterRng rng(seed, path, static_cast<std::uint32_t>(k));
    out.push_back(std::sqrt(grid.step(k)) * standard_normal(noise_dim, rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kalman recursion

struct KalmanState {
  long k = -1;  // Sigma_k = cov(X_{t_{k+1}} | increments up to k)
  Vector mu;
  Matrix sigma;
};

inline KalmanState initial_state(const Vector& x0) {
  return {-1, x0, Matrix::Zero(x0.size(), x0.size())};
}

inline KalmanState kalman_step(const StepMatrices& step, const KalmanState& state, const Vector& dw) {
  detail::require(dw.size() == step.gain.cols(), ErrorKind::dimension_mismatch,
                  "kalman_step: dW dimension");
  detail::require(dw.allFinite() && state.mu.allFinite() && state.sigma.allFinite(),
                  ErrorKind::invalid_input, "kalman_step: non-finite input");
  KalmanState next;
  next.k = state.k + 1;
  next.mu = step.flow * state.mu + step.gain * dw;
  next.sigma = symmetrize(step.flow * state.sigma * step.flow.transpose() + step.resid_cov);
  return next;
}

inline KalmanState kalman_step(const LinearSdeModel& model, const KalmanState& state, double dt,
                               const Vector& dw) {
  return kalman_step(step_matrices(model, dt), state, dw);
}

struct ErrorReport {
  std::size_t n = 0;
  double terminal = 0.0;  // <M, Sigma_{N-1}>
  double integral = 0.0;  // sum_k <M, Sigma_k> dt_k

  double n2_terminal() const { return double(n) * double(n) * terminal; }
  double n2_integral() const { return double(n) * double(n) * integral; }
};

inline void write_error_header(csv::Writer& w) {
  w.cell("N").cell("T_N").cell("I_N").cell("N2T_N").cell("N2I_N").end_row();
}

inline void write_error_row(csv::Writer& w, const ErrorReport& r) {
  w.cell(r.n).cell(r.terminal).cell(r.integral).cell(r.n2_terminal()).cell(r.n2_integral()).end_row();
}

/// Sigma_0..Sigma_{N-1}. Depends on the grid only.
inline std::vector<Matrix> covariance_recursion(const StepTable& steps, Eigen::Index n) {
  std::vector<Matrix> out;
  out.reserve(steps.size());
  Matrix sigma = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const StepMatrices& s = steps[k];
    sigma = symmetrize(s.flow * sigma * s.flow.transpose() + s.resid_cov);
    out.push_back(sigma);
  }
  return out;
}

inline ErrorReport error_report(const LinearSdeModel& model, const TimeGrid& grid,
                                const std::vector<Matrix>& sigmas) {
  ErrorReport r;
  r.n = grid.size();
  for (std::size_t k = 0; k < sigmas.size(); ++k)
    r.integral += frobenius_pairing(model.weight(), sigmas[k]) * grid.step(k);
  r.terminal = frobenius_pairing(model.weight(), sigmas.back());
  return r;
}

/// Error functionals of the grid without running the mean recursion.
inline ErrorReport grid_error(const LinearSdeModel& model, const TimeGrid& grid) {
  validate_model(model);
  const StepTable steps(model, grid);
  return error_report(model, grid, covariance_recursion(steps, model.state_dim()));
}

struct FilterResult {
  std::vector<KalmanState> trajectory;  // k = -1 .. N-1
  ErrorReport report;
};

inline FilterResult run_filter(const LinearSdeModel& model, const TimeGrid& grid, const Vector& x0,
                               const WienerIncrements& increments) {
  validate_model(model);
  detail::require(increments.size() == grid.size(), ErrorKind::dimension_mismatch,
                  "run_filter: increments do not match the grid");
  detail::require(x0.size() == model.state_dim(), ErrorKind::dimension_mismatch,
                  "run_filter: X0 dimension");
  const StepTable steps(model, grid);
  FilterResult out;
  out.trajectory.reserve(grid.size() + 1);
  out.trajectory.push_back(initial_state(x0));
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.trajectory.push_back(kalman_step(steps[k], out.trajectory.back(), increments[k]));

  std::vector<Matrix> sigmas;
  sigmas.reserve(grid.size());
  for (std::size_t k = 1; k < out.trajectory.size(); ++k) sigmas.push_back(out.trajectory[k].sigma);
  out.report = error_report(model, grid, sigmas);
  return out;
}

/// Sigma_k summed in closed form from the variation-of-constants formula.
inline Matrix closed_form_sigma(const LinearSdeModel& model, const TimeGrid& grid, std::size_t k) {
  detail::require(k < grid.size(), ErrorKind::domain, "closed_form_sigma: index out of range");
  const Matrix& a = model.dynamics();
  const Eigen::Index n = model.state_dim();
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t j = 0; j <= k; ++j) {
    const double dt = grid.step(j);
    const Matrix flow = mat_exp(a, grid[k + 1] - grid[j + 1]);
    sum += flow * kt_matrix(a, model.diffusion(), dt) * flow.transpose() * (dt * dt * dt);
  }
  return symmetrize(sum);
}

/// Writes k,t,mu_1..mu_n,sigma_11..sigma_nn (all entries, row-major); t = t_{k+1}.
inline void write_trajectory_csv(std::ostream& os, const TimeGrid& grid,
                                 const std::vector<KalmanState>& trajectory) {
  csv::Writer w(os);
  if (trajectory.empty()) return;
  const Eigen::Index n = trajectory.front().mu.size();
  w.cell("k").cell("t");
  for (Eigen::Index i = 0; i < n; ++i) w.cell("mu_" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      w.cell("sigma_" + std::to_string(i + 1) + std::to_string(j + 1));
  w.end_row();
  for (const KalmanState& s : trajectory) {
    w.cell(std::to_string(s.k)).cell(grid[std::size_t(s.k + 1)]);
    for (Eigen::Index i = 0; i < n; ++i) w.cell(s.mu[i]);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) w.cell(s.sigma(i, j));
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// Baseline one-step schemes

/// x + f(x) dt + g(x) dW.
template <class Drift, class Dispersion>
Vector euler_maruyama_step(Drift&& f, Dispersion&& g, const Vector& x, double dt, const Vector& dw) {
  detail::require(dt > 0.0, ErrorKind::domain, "euler_maruyama_step: dt must be positive");
  const Vector drift = f(x);
  const Matrix disp = g(x);
  detail::require(drift.allFinite() && disp.allFinite(), ErrorKind::invalid_input,
                  "euler_maruyama_step: non-finite drift or dispersion");
  return x + drift * dt + disp * dw;
}

/// Scalar Milstein: x + f dt + g dW + g g' (dW^2 - dt) / 2.
template <class Drift, class Dispersion, class DispersionDerivative>
double milstein_step_scalar(Drift&& f, Dispersion&& g, DispersionDerivative&& dg, double x,
                            double dt, double dw) {
  detail::require(dt > 0.0, ErrorKind::domain, "milstein_step_scalar: dt must be positive");
  const double fx = f(x), gx = g(x), dgx = dg(x);
  detail::require(std::isfinite(fx) && std::isfinite(gx) && std::isfinite(dgx),
                  ErrorKind::invalid_input, "milstein_step_scalar: non-finite coefficients");
  return x + fx * dt + gx * dw + 0.5 * gx * dgx * (dw * dw - dt);
}

// ---------------------------------------------------------------------------
// Brownian bridge

struct BridgeMoments {
  Vector mean_offset;  // E(W_s | dW) - W_{t_k}
  double cov_factor;   // cov(W_s, W_t | dW) = cov_factor * I_m
};

inline BridgeMoments bridge_moments(double t_lo, double t_hi, double s, double t, const Vector& dw) {
  detail::require(t_hi > t_lo, ErrorKind::invalid_input, "bridge_moments: empty interval");
  detail::require(s >= t_lo && s <= t_hi && t >= t_lo && t <= t_hi, ErrorKind::domain,
                  "bridge_moments: s, t outside the interval");
  const double len = t_hi - t_lo;
  return {dw * ((s - t_lo) / len), std::min(s, t) - t_lo - (s - t_lo) * (t - t_lo) / len};
}

namespace detail {

/// Order-preserving map from doubles to integers.
inline std::int64_t ordered_bits(double x) {
  const auto i = std::bit_cast<std::int64_t>(x);
  return i >= 0 ? i : std::numeric_limits<std::int64_t>::min() - i;
}

inline double from_ordered_bits(std::int64_t k) {
  return std::bit_cast<double>(k >= 0 ? k : std::numeric_limits<std::int64_t>::min() - k);
}

/// The x for which s + x rounds to target, or the closest such sum when none exists.
/// s + x is monotone in x, so a bisection over the bit pattern of x suffices.
inline double closing_summand(double s, double target) {
  const double guess = target - s;
  if (s + guess == target) return guess;
  const std::int64_t centre = ordered_bits(guess), span = std::int64_t(1) << 40;
  std::int64_t lo = centre - span, hi = centre + span;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (s + from_ordered_bits(mid) >= target)
      hi = mid;
    else
      lo = mid + 1;
  }
  const double above = from_ordered_bits(lo), below = from_ordered_bits(lo - 1);
  return std::abs(s + above - target) <= std::abs(s + below - target) ? above : below;
}

}  // namespace detail

/// Splits dW over an interval of length dt into r equal sub-increments drawn
/// from the Brownian bridge. Their left-to-right sum reproduces dW bitwise
/// whenever some double makes that possible; otherwise the sum is the closest
/// one reachable from the last partial sum.
template <class Rng>
std::vector<Vector> sample_bridge_refinement(double dt, const Vector& dw, int r, Rng& rng) {
  detail::require(r >= 2, ErrorKind::invalid_input, "sample_bridge_refinement: r >= 2");
  detail::require(dt > 0.0, ErrorKind::domain, "sample_bridge_refinement: dt must be positive");
  const double h = dt / r;
  std::vector<Vector> out;
  out.reserve(std::size_t(r));
  Vector partial = Vector::Zero(dw.size());
  for (int i = 0; i < r - 1; ++i) {
    // Next sub-increment given the remaining bridge displacement over the remaining time.
    const double remaining = dt - i * h;
    const Vector mean = (dw - partial) * (h / remaining);
    const double var = h * (remaining - h) / remaining;
    Vector inc = mean + std::sqrt(var) * standard_normal(dw.size(), rng);
    partial += inc;
    out.push_back(std::move(inc));
  }
  Vector last(dw.size());
  for (Eigen::Index c = 0; c < dw.size(); ++c) last[c] = detail::closing_summand(partial[c], dw[c]);
  out.push_back(std::move(last));
  return out;
}

/// Splits every step into r equal substeps.
inline TimeGrid refine_grid(const TimeGrid& grid, int r) {
  detail::require(r >= 1, ErrorKind::invalid_input, "refine_grid: r >= 1");
  std::vector<double> pts;
  pts.reserve(grid.size() * std::size_t(r) + 1);
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (int i = 0; i < r; ++i) pts.push_back(grid[k] + grid.step(k) * i / r);
  pts.push_back(grid.horizon());
  return TimeGrid(std::move(pts));
}

// ---------------------------------------------------------------------------
// Parallel Monte Carlo

/// Worker count: hardware concurrency capped by SDE_GRIDOPT_THREADS.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SDE_GRIDOPT_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, unsigned(cap));
  }
  return n;
}

/// Calls body(i) for i in [0, count) on worker_count() threads.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

struct McEstimate {
  double sample = 0.0;     // Monte Carlo mean
  double predicted = 0.0;  // from the covariance recursion
  double std_error = 0.0;

  double zscore() const {
    if (std_error > 0.0) return (sample - predicted) / std_error;
    return sample == predicted ? 0.0 : INFINITY;
  }
};

struct McReport {
  std::size_t n = 0;
  std::size_t paths = 0;
  McEstimate terminal;  // |X_T - mu_{N-1}|_M^2
  McEstimate integral;  // sum_k |X_{t_{k+1}} - mu_k|_M^2 dt_k
};

namespace detail {

inline McEstimate summarize(const std::vector<double>& samples, double predicted) {
  McEstimate e;
  e.predicted = predicted;
  const double count = double(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= count;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  e.sample = mean;
  e.std_error = samples.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
  return e;
}

}  // namespace detail

/// Simulates exact paths, filters each one from its own increments and
/// compares the empirical weighted squared error with <M, Sigma>.
inline McReport mc_verify_mse(const LinearSdeModel& model, const TimeGrid& grid, const Vector& x0,
                              std::size_t paths, std::uint64_t seed) {
  validate_model(model);
  detail::require(paths >= 100, ErrorKind::invalid_input, "mc_verify_mse: paths >= 100");
  detail::require(x0.size() == model.state_dim(), ErrorKind::dimension_mismatch,
                  "mc_verify_mse: X0 dimension");
  const StepTable steps(model, grid);
  const Matrix& m = model.weight();

  std::vector<double> terminal(paths), integral(paths);
  parallel_for(paths, [&](std::size_t p) {
    const PathSample path = sample_exact_path(steps, x0, seed, p);
    KalmanState state = initial_state(x0);
    double acc = 0.0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      state = kalman_step(steps[k], state, path.increments[k]);
      const Vector err = path.states[k + 1] - state.mu;
      acc += err.dot(m * err) * grid.step(k);
      if (k + 1 == steps.size()) terminal[p] = err.dot(m * err);
    }
    integral[p] = acc;
  });

  const ErrorReport predicted = error_report(model, grid, covariance_recursion(steps, model.state_dim()));
  McReport out;
  out.n = grid.size();
  out.paths = paths;
  out.terminal = detail::summarize(terminal, predicted.terminal);
  out.integral = detail::summarize(integral, predicted.integral);
  return out;
}

/// Euler-Maruyama terminal error |X_T - X_N^EM|^2_M on exact paths, paired with
/// the Kalman value <M, Sigma_{N-1}> it cannot beat.
inline McEstimate em_terminal_mse(const LinearSdeModel& model, const TimeGrid& grid, const Vector& x0,
                                  std::size_t paths, std::uint64_t seed) {
  validate_model(model);
  detail::require(paths >= 100, ErrorKind::invalid_input, "em_terminal_mse: paths >= 100");
  detail::require(x0.size() == model.state_dim(), ErrorKind::dimension_mismatch,
                  "em_terminal_mse: X0 dimension");
  const StepTable steps(model, grid);
  const Matrix& a = model.dynamics();
  const Matrix& b = model.dispersion();
  const Matrix& m = model.weight();
  const auto f = [&](const Vector& x) -> Vector { return a * x; };
  const auto g = [&](const Vector&) -> Matrix { return b; };

  std::vector<double> err(paths);
  parallel_for(paths, [&](std::size_t p) {
    const PathSample path = sample_exact_path(steps, x0, seed, p);
    Vector x = x0;
    for (std::size_t k = 0; k < steps.size(); ++k) x = euler_maruyama_step(f, g, x, grid.step(k), path.increments[k]);
    const Vector e = path.states.back() - x;
    err[p] = e.dot(m * e);
  });
  const ErrorReport kalman = error_report(model, grid, covariance_recursion(steps, model.state_dim()));
  return detail::summarize(err, kalman.terminal);
}

// ---------------------------------------------------------------------------
// Strong convergence on geometric Brownian motion

struct GbmParams {
  double drift = 2.0;       // a in dX = a X dt + sigma X dW
  double volatility = 1.0;  // sigma
  double x0 = 1.0;
  double horizon = 1.0;
};

struct StrongErrors {
  std::vector<std::size_t> steps;
  std::vector<double> euler;     // E|X_T - X_N^EM|
  std::vector<double> milstein;  // E|X_T - X_N^Mil|
};

/// Terminal strong errors of Euler-Maruyama and Milstein against the exact
/// lognormal solution, for N = 2^lo .. 2^hi on coarsenings of one fine path
/// per sample.
inline StrongErrors gbm_strong_errors(const GbmParams& p, int lo, int hi, std::size_t paths,
                                      std::uint64_t seed) {
  detail::require(lo >= 0 && hi >= lo && hi < 30, ErrorKind::invalid_input,
                  "gbm_strong_errors: bad level range");
  const std::size_t fine = std::size_t(1) << hi;
  const std::size_t levels = std::size_t(hi - lo + 1);
  std::vector<std::vector<double>> em(levels, std::vector<double>(paths));
  std::vector<std::vector<double>> mil(levels, std::vector<double>(paths));

  const auto f = [&](double x) { return p.drift * x; };
  const auto g = [&](double x) { return p.volatility * x; };
  const auto dg = [&](double) { return p.volatility; };
  const auto fv = [&](const Vector& x) -> Vector { return p.drift * x; };
  const auto gv = [&](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, p.volatility * x[0]); };

  parallel_for(paths, [&](std::size_t path) {
    CounterRng rng(seed, path);
    std::vector<double> dw(fine);
    const double h = p.horizon / double(fine);
    double w = 0.0;
    for (double& v : dw) {
      v = std::sqrt(h) * rng.normal();
      w += v;
    }
    const double exact =
        p.x0 * std::exp((p.drift - 0.5 * p.volatility * p.volatility) * p.horizon + p.volatility * w);
    for (std::size_t level = 0; level < levels; ++level) {
      const std::size_t n = std::size_t(1) << (lo + int(level));
      const std::size_t stride = fine / n;
      const double dt = p.horizon / double(n);
      Vector xe = Vector::Constant(1, p.x0);
      double xm = p.x0;
      for (std::size_t k = 0; k < n; ++k) {
        double inc = 0.0;
        for (std::size_t i = 0; i < stride; ++i) inc += dw[k * stride + i];
        xe = euler_maruyama_step(fv, gv, xe, dt, Vector::Constant(1, inc));
        xm = milstein_step_scalar(f, g, dg, xm, dt, inc);
      }
      em[level][path] = std::abs(exact - xe[0]);
      mil[level][path] = std::abs(exact - xm);
    }
  });

  StrongErrors out;
  for (std::size_t level = 0; level < levels; ++level) {
    out.steps.push_back(std::size_t(1) << (lo + int(level)));
    double se = 0.0, sm = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
      se += em[level][i];
      sm += mil[level][i];
    }
    out.euler.push_back(se / double(paths));
    out.milstein.push_back(sm / double(paths));
  }
  return out;
}

/// Least-squares slope of log(error) against log(dt).
inline double fitted_order(const std::vector<std::size_t>& steps, const std::vector<double>& errors) {
  const std::size_t n = steps.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -std::log(double(steps[i]));
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace sde_gridopt
