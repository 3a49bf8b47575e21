#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sde_gridopt/matfun.hpp"

namespace sde_gridopt {

/// Frobenius inner product Tr(K^T L).
inline double frobenius_pairing(const Matrix& k, const Matrix& l) {
  detail::require_same_order(k, l, "frobenius_pairing");
  return (k.array() * l.array()).sum();
}

/// Linear SDE dX = A X dt + B dW on a horizon T with error weight M.
/// The diffusion D = B B^T is cached at construction; call validate_model
/// before handing a user-supplied model to the solver.
class LinearSdeModel {
 public:
  LinearSdeModel(Matrix a, Matrix b, Matrix m, double horizon)
      : a_(std::move(a)), b_(std::move(b)), m_(std::move(m)), horizon_(horizon) {
    if (a_.rows() == b_.rows() && b_.size() > 0) d_ = symmetrize(b_ * b_.transpose());
  }

  const Matrix& dynamics() const noexcept { return a_; }
  const Matrix& dispersion() const noexcept { return b_; }
  const Matrix& weight() const noexcept { return m_; }
  const Matrix& diffusion() const noexcept { return d_; }
  double horizon() const noexcept { return horizon_; }

  Eigen::Index state_dim() const noexcept { return a_.rows(); }
  Eigen::Index noise_dim() const noexcept { return b_.cols(); }

  LinearSdeModel with_horizon(double horizon) const { return {a_, b_, m_, horizon}; }
  LinearSdeModel with_weight(Matrix m) const { return {a_, b_, std::move(m), horizon_}; }

 private:
  Matrix a_;
  Matrix b_;
  Matrix m_;
  Matrix d_;
  double horizon_;
};

/// Names of every violated model invariant; empty when the model is valid.
inline std::vector<std::string> model_violations(const LinearSdeModel& model) {
  std::vector<std::string> out;
  const Matrix& a = model.dynamics();
  const Matrix& b = model.dispersion();
  const Matrix& m = model.weight();

  if (a.rows() < 1 || a.rows() != a.cols()) out.emplace_back("dynamics-not-square");
  if (b.rows() != a.rows() || b.cols() < 1) out.emplace_back("dispersion-shape");
  if (m.rows() != a.rows() || m.cols() != a.rows()) out.emplace_back("weight-shape");
  if (!a.allFinite()) out.emplace_back("dynamics-not-finite");
  if (!b.allFinite()) out.emplace_back("dispersion-not-finite");
  if (!m.allFinite()) out.emplace_back("weight-not-finite");
  if (!(std::isfinite(model.horizon()) && model.horizon() > 0.0)) out.emplace_back("horizon");

  if (m.rows() == m.cols() && m.size() > 0 && m.allFinite()) {
    const double scale = std::max(1.0, m.norm());
    if ((m - m.transpose()).norm() > detail::kSymmetryTol * scale)
      out.emplace_back("weight-not-symmetric");
    else if (!is_psd(m))
      out.emplace_back("weight-not-psd");
  }
  if (b.rows() == a.rows() && b.size() > 0 && b.allFinite()) {
    const Matrix& d = model.diffusion();
    const Matrix recomputed = b * b.transpose();
    if ((d - recomputed).norm() > 1e-12 * std::max(1.0, recomputed.norm()) || !is_psd(d))
      out.emplace_back("diffusion-not-psd");
  }
  return out;
}

/// Throws invalid-input naming every violated invariant.
inline void validate_model(const LinearSdeModel& model) {
  const auto violations = model_violations(model);
  if (violations.empty()) return;
  std::string what = "invalid model:";
  for (const auto& v : violations) what += " " + v;
  throw Error(ErrorKind::invalid_input, what);
}

struct RegularityReport {
  double gram_det = 0.0;
  bool satisfied = false;
  /// (j, k) entry <M, A^{j+1} D (A^T)^{k+1}>, zero-based.
  Matrix gram_matrix;
};

/// Tests det(<M, A^j D (A^T)^k>)_{1<=j,k<=n} > 0, the condition under which the
/// 1/3-law optimal grids exist and F_t > 0 on the whole horizon.
inline RegularityReport regularity_check(const LinearSdeModel& model) {
  validate_model(model);
  const Matrix& a = model.dynamics();
  const Matrix& d = model.diffusion();
  const Matrix& m = model.weight();
  const Eigen::Index n = model.state_dim();

  std::vector<Matrix> powers;  // A^1 .. A^n, unscaled
  powers.reserve(static_cast<std::size_t>(n));
  powers.push_back(a);
  for (Eigen::Index j = 1; j < n; ++j) powers.push_back(powers.back() * a);

  RegularityReport report;
  report.gram_matrix.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Matrix left = powers[static_cast<std::size_t>(j)] * d;
    for (Eigen::Index k = j; k < n; ++k) {
      const double v = frobenius_pairing(m, left * powers[static_cast<std::size_t>(k)].transpose());
      report.gram_matrix(j, k) = v;
      report.gram_matrix(k, j) = v;
    }
  }
  report.gram_det = report.gram_matrix.determinant();
  // The Gram matrix is PSD, so det <= prod(diag) (Hadamard). Determinants
  // at rounding level relative to that bound are reported as exactly zero.
  const double hadamard = report.gram_matrix.diagonal().prod();
  if (std::abs(report.gram_det) <= 1e-12 * hadamard || hadamard == 0.0) report.gram_det = 0.0;
  report.satisfied = report.gram_det > 0.0;
  return report;
}

}  // namespace sde_gridopt
