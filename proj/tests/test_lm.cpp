#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "tlsscope/lm.hpp"
#include "tlsscope/rng.hpp"

using namespace tlsscope;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("linear model reproduces closed-form least squares") {
  Engine gen = make_engine(11);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(0.25 * i);
    y.push_back(1.5 - 0.7 * x.back() + noise(gen));
  }
  auto model = [&](std::span<const double> p, std::vector<double>& r, std::vector<double>& j) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      r[i] = p[0] + p[1] * x[i] - y[i];
      j[i * 2] = 1.0;
      j[i * 2 + 1] = x[i];
    }
  };
  const auto res = levenberg_marquardt(model, {0.0, 0.0}, x.size());
  REQUIRE(res.converged);

  // Normal equations by hand.
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  const double b = (n * sxy - sx * sy) / det;
  const double a = (sy - b * sx) / n;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) rss += std::pow(a + b * x[i] - y[i], 2);
  const double s2 = rss / (n - 2);
  CHECK_THAT(res.params[0], WithinRel(a, 1e-9));
  CHECK_THAT(res.params[1], WithinRel(b, 1e-9));
  CHECK_THAT(res.rss, WithinRel(rss, 1e-9));
  CHECK_THAT(res.covariance[0], WithinRel(s2 * sxx / det, 1e-6));
  CHECK_THAT(res.covariance[3], WithinRel(s2 * n / det, 1e-6));
  CHECK_THAT(res.covariance[1], WithinRel(-s2 * sx / det, 1e-6));
  CHECK(res.covariance[1] == res.covariance[2]);
}

TEST_CASE("exponential decay recovered from noiseless data") {
  std::vector<double> t, y;
  for (int i = 0; i < 30; ++i) {
    t.push_back(0.1 * i);
    y.push_back(2.0 * std::exp(-1.3 * t.back()) + 0.5);
  }
  auto model = [&](std::span<const double> p, std::vector<double>& r, std::vector<double>& j) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double e = std::exp(-p[1] * t[i]);
      r[i] = p[0] * e + p[2] - y[i];
      j[i * 3] = e;
      j[i * 3 + 1] = -p[0] * t[i] * e;
      j[i * 3 + 2] = 1.0;
    }
  };
  const auto res = levenberg_marquardt(model, {1.0, 0.5, 0.0}, t.size());
  REQUIRE(res.converged);
  CHECK_THAT(res.params[0], WithinRel(2.0, 1e-8));
  CHECK_THAT(res.params[1], WithinRel(1.3, 1e-8));
  CHECK_THAT(res.params[2], WithinRel(0.5, 1e-8));
  for (std::size_t i = 1; i < res.rss_history.size(); ++i) CHECK(res.rss_history[i] < res.rss_history[i - 1]);
}

TEST_CASE("Rosenbrock valley") {
  auto model = [](std::span<const double> p, std::vector<double>& r, std::vector<double>& j) {
    r[0] = 10.0 * (p[1] - p[0] * p[0]);
    r[1] = 1.0 - p[0];
    j[0] = -20.0 * p[0];
    j[1] = 10.0;
    j[2] = -1.0;
    j[3] = 0.0;
  };
  const auto res = levenberg_marquardt(model, {-1.2, 1.0}, 2);
  CHECK(res.converged);
  CHECK_THAT(res.params[0], WithinAbs(1.0, 1e-8));
  CHECK_THAT(res.params[1], WithinAbs(1.0, 1e-8));
}

TEST_CASE("unconstrained direction has infinite variance") {
  // p[1] never enters the residuals.
  auto model = [](std::span<const double> p, std::vector<double>& r, std::vector<double>& j) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = p[0] - double(i % 2);
      j[i * 2] = 1.0;
      j[i * 2 + 1] = 0.0;
    }
  };
  const auto res = levenberg_marquardt(model, {0.0, 3.0}, 10);
  CHECK_THAT(res.params[0], WithinAbs(0.5, 1e-12));
  CHECK(std::isinf(res.covariance[3]));
  CHECK(std::isfinite(res.covariance[0]));
}

TEST_CASE("iteration cap and bad input") {
  auto model = [](std::span<const double> p, std::vector<double>& r, std::vector<double>& j) {
    r[0] = p[0];
    j[0] = 1.0;
  };
  CHECK_THROWS_AS(levenberg_marquardt(model, {1.0, 2.0}, 1), InvalidArgument);

  auto nan_model = [](std::span<const double>, std::vector<double>& r, std::vector<double>& j) {
    r[0] = std::nan("");
    j[0] = 1.0;
  };
  CHECK_THROWS_AS(levenberg_marquardt(nan_model, {1.0}, 1), NoConvergence);

  LmOptions opt;
  opt.max_iterations = 2;
  auto slow = [](std::span<const double> p, std::vector<double>& r, std::vector<double>& j) {
    r[0] = 10.0 * (p[1] - p[0] * p[0]);
    r[1] = 1.0 - p[0];
    j[0] = -20.0 * p[0];
    j[1] = 10.0;
    j[2] = -1.0;
    j[3] = 0.0;
  };
  const auto res = levenberg_marquardt(slow, {-1.2, 1.0}, 2, opt);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 2);
}
