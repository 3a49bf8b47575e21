#pragma once

// Test-only reference computations. None of these go through the library's
// Pade exponential, Van Loan blocks or K_t series.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

using Matrix = Eigen::MatrixXd;

/// e^{A} by plain Taylor series after scaling by 2^s, then squaring.
inline Matrix taylor_exp(const Matrix& a) {
  int s = 0;
  double norm = a.norm();
  while (norm > 0.25) {
    norm /= 2.0;
    ++s;
  }
  const Matrix x = a / std::ldexp(1.0, s);
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * x / double(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

/// Adaptive Simpson for scalar integrands.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-13) {
  const std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps,
          int depth) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
          return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, eps / 2.0, depth - 1) +
               rec(mid, hi, fmid, frm, fhi, right, eps / 2.0, depth - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

/// Gauss-Legendre (20 nodes per panel) of a matrix-valued integrand.
inline Matrix gauss_legendre(const std::function<Matrix(double)>& f, double a, double b,
                             int panels = 16) {
  static const double x[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                               0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                               0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
                               0.9931285991850949};
  static const double w[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
                               0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
                               0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
                               0.0176140071391521};
  Matrix sum;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h, r = 0.5 * h;
    for (int i = 0; i < 10; ++i) {
      const Matrix v = w[i] * r * (f(c - r * x[i]) + f(c + r * x[i]));
      sum = sum.size() ? Matrix(sum + v) : v;
    }
  }
  return sum;
}

/// int_0^t e^{sA} D e^{sA^T} ds.
inline Matrix gramian(const Matrix& a, const Matrix& d, double t) {
  return gauss_legendre(
      [&](double s) {
        const Matrix e = taylor_exp(s * a);
        return Matrix(e * d * e.transpose());
      },
      0.0, t);
}

/// E(tA) by Taylor series sum (tA)^k / (k+1)!.
inline Matrix phi1_series(const Matrix& a, double t) {
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k < 60; ++k) {
    term = term * (t * a) / double(k + 1);
    sum += term;
  }
  return sum;
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * nd(rng);
  return m;
}

inline double rel_diff(const Matrix& x, const Matrix& y) {
  const double scale = std::max(x.norm(), y.norm());
  return scale == 0.0 ? 0.0 : (x - y).norm() / scale;
}

}  // namespace oracle
