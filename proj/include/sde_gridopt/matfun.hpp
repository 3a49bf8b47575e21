#pragma once

// Dense small-matrix functions used by the linear SDE solver: the matrix
// exponential, the phi-function E(z) = (e^z - 1)/z, finite-horizon
// controllability/observability Gramians and the residual covariance
// coefficient K_t of the Kalman recursion.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>
#include <vector>
#include <algorithm>

#include "sde_gridopt/error.hpp"

namespace sde_gridopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline void require_finite(const Matrix& m, const char* name) {
  require(m.allFinite(), ErrorKind::invalid_input,
          std::string(name) + " has non-finite entries");
}

inline void require_square(const Matrix& m, const char* name) {
  require(m.rows() == m.cols() && m.rows() >= 1, ErrorKind::dimension_mismatch,
          std::string(name) + " must be a non-empty square matrix");
}

inline void require_same_order(const Matrix& a, const Matrix& b, const char* what) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::dimension_mismatch,
          std::string(what) + ": dimension mismatch");
}

inline void require_time(double t, const char* what) {
  require(std::isfinite(t), ErrorKind::invalid_input, std::string(what) + ": non-finite time");
  require(t >= 0.0, ErrorKind::domain, std::string(what) + ": negative time");
}

// Relative asymmetry tolerance for matrices that must be symmetric.
inline constexpr double kSymmetryTol = 1e-12;

inline void require_symmetric(const Matrix& m, const char* name) {
  const double scale = std::max(1.0, m.norm());
  require((m - m.transpose()).norm() <= kSymmetryTol * scale, ErrorKind::invalid_input,
          std::string(name) + " is not symmetric");
}

}  // namespace detail

/// (X + X^T) / 2
inline Matrix symmetrize(const Matrix& x) { return 0.5 * (x + x.transpose()); }

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// PSD test with tolerance -tol * ||X||_F on the minimum eigenvalue.
inline bool is_psd(const Matrix& sym, double tol = 1e-10) {
  if (sym.rows() != sym.cols()) return false;
  return min_eigenvalue(symmetrize(sym)) >= -tol * std::max(sym.norm(), 1e-300);
}

/// Symmetric square root L with L L^T = X, negative eigenvalues clipped to 0.
inline Matrix psd_sqrt(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// e^{tA}. Scaling-and-squaring with a Pade approximant (Eigen's expm).
inline Matrix mat_exp(const Matrix& a, double t) {
  detail::require_square(a, "A");
  detail::require_finite(a, "A");
  detail::require(std::isfinite(t), ErrorKind::invalid_input, "mat_exp: non-finite time");
  if (t == 0.0) return Matrix::Identity(a.rows(), a.cols());
  return Matrix((t * a).exp());
}

/// E(tA) = sum_k (tA)^k / (k+1)!, read off the exponential of [[tA, I], [0, 0]].
inline Matrix phi1(const Matrix& a, double t) {
  detail::require_square(a, "A");
  detail::require_finite(a, "A");
  detail::require(std::isfinite(t), ErrorKind::invalid_input, "phi1: non-finite time");
  const Eigen::Index n = a.rows();
  if (t == 0.0) return Matrix::Identity(n, n);
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = t * a;
  block.topRightCorner(n, n).setIdentity();
  const Matrix e = block.exp();
  return e.topRightCorner(n, n);
}

namespace detail {

// Van Loan: exp(t [[-F, W], [0, F^T]]) = [[e^{-tF}, X], [0, e^{tF^T}]] and
// int_0^t e^{sF} W e^{sF^T} ds = e^{tF} X.
inline Matrix van_loan_integral(const Matrix& f, const Matrix& w, double t) {
  const Eigen::Index n = f.rows();
  if (t == 0.0) return Matrix::Zero(n, n);
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -f;
  block.topRightCorner(n, n) = w;
  block.bottomRightCorner(n, n) = f.transpose();
  const Matrix e = (t * block).exp();
  const Matrix flow = e.bottomRightCorner(n, n).transpose();
  return symmetrize(flow * e.topRightCorner(n, n));
}

}  // namespace detail

/// Controllability Gramian G_t = int_0^t e^{sA} D e^{sA^T} ds.
inline Matrix ctrl_gramian(const Matrix& a, const Matrix& d, double t) {
  detail::require_square(a, "A");
  detail::require_same_order(a, d, "ctrl_gramian");
  detail::require_finite(a, "A");
  detail::require_finite(d, "D");
  detail::require_time(t, "ctrl_gramian");
  detail::require_symmetric(d, "D");
  return detail::van_loan_integral(a, d, t);
}

/// Observability Gramian Q_t = int_0^t e^{sA^T} M e^{sA} ds.
inline Matrix obs_gramian(const Matrix& a, const Matrix& m, double t) {
  detail::require_square(a, "A");
  detail::require_same_order(a, m, "obs_gramian");
  detail::require_finite(a, "A");
  detail::require_finite(m, "M");
  detail::require_time(t, "obs_gramian");
  detail::require_symmetric(m, "M");
  return detail::van_loan_integral(a.transpose(), m, t);
}

/// R_t = e^{tA^T} M e^{tA}, the time derivative of Q_t.
inline Matrix weight_propagate(const Matrix& a, const Matrix& m, double t) {
  detail::require_square(a, "A");
  detail::require_same_order(a, m, "weight_propagate");
  detail::require_finite(m, "M");
  detail::require_time(t, "weight_propagate");
  const Matrix flow = mat_exp(a, t);
  return symmetrize(flow.transpose() * m * flow);
}

/// Small-step limit of K_t: A D A^T / 12.
inline Matrix mho(const Matrix& a, const Matrix& d) {
  detail::require_square(a, "A");
  detail::require_same_order(a, d, "mho");
  detail::require_finite(a, "A");
  detail::require_finite(d, "D");
  return symmetrize(a * d * a.transpose() / 12.0);
}

// Below this value of t*||A||_F, K_t is summed from its double series.
inline constexpr double kKtSeriesThreshold = 0.1;

/// K_t from the double series sum_{j,k>=1} jk t^{j+k-2} / ((j+1)!(k+1)!(j+k+1)) A^j D (A^T)^k.
/// Summation runs over total order s = j + k and stops once an order's
/// contribution falls below 1e-16 of the running sum.
inline Matrix kt_series(const Matrix& a, const Matrix& d, double t) {
  detail::require_time(t, "kt_series");
  const Eigen::Index n = a.rows();
  // powers[j] = t^{j-1} A^j, recip_fact[j] = 1/(j+1)!
  std::vector<Matrix> powers{Matrix::Zero(n, n), a};
  std::vector<Matrix> left{Matrix::Zero(n, n), a * d};  // powers[j] * D
  std::vector<double> recip_fact{1.0, 0.5};

  Matrix sum = Matrix::Zero(n, n);
  constexpr int kMaxOrder = 400;
  for (int s = 2; s <= kMaxOrder; ++s) {
    const int need = s - 1;
    while (static_cast<int>(powers.size()) <= need) {
      const int j = static_cast<int>(powers.size());
      powers.push_back(t * powers.back() * a);
      left.push_back(powers.back() * d);
      recip_fact.push_back(recip_fact.back() / (j + 1));
    }
    Matrix order = Matrix::Zero(n, n);
    for (int j = 1; j < s; ++j) {
      const int k = s - j;
      const double c = double(j) * k * recip_fact[j] * recip_fact[k] / (s + 1);
      order.noalias() += c * left[j] * powers[k].transpose();
    }
    sum += order;
    const double acc = sum.norm();
    if (order.norm() < 1e-16 * acc || acc == 0.0) break;
  }
  return symmetrize(sum);
}

/// K_t from t^{-2} (t^{-1} G_t - E(tA) D E(tA)^T). The difference cancels to
/// relative order (t|A|)^2, so both terms are formed in extended precision.
inline Matrix kt_direct(const Matrix& a, const Matrix& d, double t) {
  detail::require(t > 0.0, ErrorKind::domain, "kt_direct: requires t > 0");
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = a.rows();
  const long double lt = t;
  const LMatrix la = a.cast<long double>();
  const LMatrix ld = d.cast<long double>();

  LMatrix phi_block = LMatrix::Zero(2 * n, 2 * n);
  phi_block.topLeftCorner(n, n) = lt * la;
  phi_block.topRightCorner(n, n).setIdentity();
  const LMatrix e = LMatrix(phi_block.exp()).topRightCorner(n, n);

  LMatrix gram_block = LMatrix::Zero(2 * n, 2 * n);
  gram_block.topLeftCorner(n, n) = -lt * la;
  gram_block.topRightCorner(n, n) = lt * ld;
  gram_block.bottomRightCorner(n, n) = lt * la.transpose();
  const LMatrix ge = gram_block.exp();
  const LMatrix g = ge.bottomRightCorner(n, n).transpose() * ge.topRightCorner(n, n);

  const LMatrix k = (g / lt - e * ld * e.transpose()) / (lt * lt);
  return symmetrize(k.cast<double>());
}

/// K_t; equals mho(A, D) at t = 0.
inline Matrix kt_matrix(const Matrix& a, const Matrix& d, double t) {
  detail::require_square(a, "A");
  detail::require_same_order(a, d, "kt_matrix");
  detail::require_finite(a, "A");
  detail::require_finite(d, "D");
  detail::require_time(t, "kt_matrix");
  if (t == 0.0) return mho(a, d);
  if (t * a.norm() < kKtSeriesThreshold) return kt_series(a, d, t);
  return kt_direct(a, d, t);
}

}  // namespace sde_gridopt
