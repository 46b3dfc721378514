#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) least squares for problems with
// a handful of parameters.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "tlsscope/errors.hpp"

namespace tlsscope {

struct LmOptions {
  int max_iterations = 200;
  double lambda_initial = 1e-3;
  double lambda_factor = 10.0;  // x on reject, / on accept
  double lambda_max = 1e14;
  double ftol = 1e-14;          // relative cost decrease
  double xtol = 1e-13;          // relative step size
};

struct LmResult {
  std::vector<double> params;
  /// Row-major p x p covariance, s^2 (J^T J)^-1 with s^2 = RSS / (n - p).
  /// Directions the data do not constrain have infinite variance.
  std::vector<double> covariance;
  double rss = 0.0;
  double residual_variance = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Cost after every accepted step, starting with the initial cost.
  std::vector<double> rss_history;

  double sigma(std::size_t i) const {
    return std::sqrt(covariance[i * params.size() + i]);
  }
};

namespace detail {

/// Solves the symmetric positive definite system a x = b in place via
/// Cholesky. Returns false if `a` is not positive definite.
inline bool cholesky_solve(std::vector<double> a, std::vector<double>& b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
    b[ii] = s / a[ii * n + ii];
  }
  return true;
}

/// Inverse of a symmetric positive semidefinite matrix by Gauss-Jordan with
/// full pivoting. Pivots below `rel_tol` times the largest diagonal mark the
/// corresponding directions unconstrained (infinite variance).
inline std::vector<double> psd_inverse(std::vector<double> a, std::size_t n,
                                       double rel_tol = 1e-13) {
  double dmax = 0;
  for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(a[i * n + i]));
  // Scale to unit diagonal for conditioning.
  std::vector<double> scale(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i * n + i];
    scale[i] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] *= scale[i] * scale[j];

  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  std::vector<bool> singular(n, false);
  std::vector<bool> used(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t piv = n;
    double best = -1;
    for (std::size_t i = 0; i < n; ++i)
      if (!used[i] && std::abs(a[i * n + i]) > best) {
        best = std::abs(a[i * n + i]);
        piv = i;
      }
    used[piv] = true;
    if (best <= rel_tol || scale[piv] == 0.0) {
      singular[piv] = true;
      continue;
    }
    const double p = a[piv * n + piv];
    for (std::size_t j = 0; j < n; ++j) {
      a[piv * n + j] /= p;
      inv[piv * n + j] /= p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == piv) continue;
      const double f = a[i * n + piv];
      if (f == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[i * n + j] -= f * a[piv * n + j];
        inv[i * n + j] -= f * inv[piv * n + j];
      }
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (singular[i] || singular[j])
        inv[i * n + j] = (i == j) ? inf : 0.0;
      else
        inv[i * n + j] *= scale[i] * scale[j];
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) inv[i * n + j] = inv[j * n + i] = 0.5 * (inv[i * n + j] + inv[j * n + i]);
  return inv;
}

}  // namespace detail

/// Minimizes sum_i r_i(x)^2. `model(x, r, jac)` fills the n residuals and the
/// row-major n x p Jacobian d r / d x.
///
/// Damping follows the Marquardt scheme (lambda * diag(J^T J)) with lambda
/// starting at `lambda_initial`, multiplied by `lambda_factor` after a
/// rejected step and divided by it after an accepted one.
template <class Model>
LmResult levenberg_marquardt(Model&& model, std::vector<double> x, std::size_t n_residuals,
                             const LmOptions& opt = {}) {
  const std::size_t p = x.size();
  if (n_residuals < p) throw InvalidArgument("levenberg_marquardt: fewer residuals than parameters");
  std::vector<double> r(n_residuals), jac(n_residuals * p);
  std::vector<double> r_try(n_residuals), jac_try(n_residuals * p);

  auto rss_of = [](const std::vector<double>& v) {
    double s = 0;
    for (double e : v) s += e * e;
    return s;
  };

  model(std::span<const double>(x), r, jac);
  double rss = rss_of(r);
  if (!std::isfinite(rss)) throw NoConvergence("levenberg_marquardt: non-finite initial cost");

  LmResult res;
  res.rss_history.push_back(rss);
  double lambda = opt.lambda_initial;
  std::vector<double> jtj(p * p), jtr(p), step(p), x_try(p);

  auto normal_equations = [&](const std::vector<double>& j, const std::vector<double>& rr) {
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    for (std::size_t i = 0; i < n_residuals; ++i) {
      const double* row = &j[i * p];
      for (std::size_t a = 0; a < p; ++a) {
        jtr[a] += row[a] * rr[i];
        for (std::size_t b = a; b < p; ++b) jtj[a * p + b] += row[a] * row[b];
      }
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < a; ++b) jtj[a * p + b] = jtj[b * p + a];
  };
  normal_equations(jac, r);

  int it = 0;
  bool converged = rss == 0.0;
  while (!converged && it < opt.max_iterations) {
    ++it;
    double dmax = 0;
    for (std::size_t a = 0; a < p; ++a) dmax = std::max(dmax, jtj[a * p + a]);
    std::vector<double> lhs = jtj;
    for (std::size_t a = 0; a < p; ++a)
      lhs[a * p + a] += lambda * std::max(jtj[a * p + a], 1e-12 * dmax + 1e-300);
    for (std::size_t a = 0; a < p; ++a) step[a] = -jtr[a];
    if (!detail::cholesky_solve(lhs, step, p)) {
      lambda *= opt.lambda_factor;
      if (lambda > opt.lambda_max) {
        converged = true;
        break;
      }
      continue;
    }
    double xnorm = 0, snorm = 0;
    for (std::size_t a = 0; a < p; ++a) {
      x_try[a] = x[a] + step[a];
      xnorm += x[a] * x[a];
      snorm += step[a] * step[a];
    }
    model(std::span<const double>(x_try), r_try, jac_try);
    const double rss_try = rss_of(r_try);
    if (std::isfinite(rss_try) && rss_try < rss) {
      const double decrease = rss - rss_try;
      x = x_try;
      std::swap(r, r_try);
      std::swap(jac, jac_try);
      rss = rss_try;
      res.rss_history.push_back(rss);
      normal_equations(jac, r);
      lambda = std::max(lambda / opt.lambda_factor, 1e-15);
      if (decrease <= opt.ftol * rss_try || rss == 0.0 ||
          std::sqrt(snorm) <= opt.xtol * (std::sqrt(xnorm) + opt.xtol))
        converged = true;
    } else {
      lambda *= opt.lambda_factor;
      if (lambda > opt.lambda_max) converged = true;
    }
  }

  res.params = x;
  res.rss = rss;
  res.iterations = it;
  res.converged = converged;
  res.residual_variance = n_residuals > p ? rss / double(n_residuals - p) : 0.0;
  res.covariance = detail::psd_inverse(jtj, p);
  for (double& c : res.covariance)
    if (std::isfinite(c)) c *= res.residual_variance;
  return res;
}

}  // namespace tlsscope
