#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "qn/line_search.hpp"

using namespace qn;

namespace {

struct Quadratic {
  std::vector<double> c;  // diagonal curvature
  std::vector<double> b;
  ObjectiveProblem problem() const {
    return ObjectiveProblem(c.size(), [c = c, b = b](std::span<const double> x, std::span<double> g) {
      double f = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        f += 0.5 * c[i] * x[i] * x[i] - b[i] * x[i];
        if (!g.empty()) g[i] = c[i] * x[i] - b[i];
      }
      return f;
    });
  }
};

// Independent quadratic value, not routed through ObjectiveProblem.
double quad_value(const Quadratic& q, std::span<const double> x) {
  double f = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * q.c[i] * x[i] * x[i] - q.b[i] * x[i];
  return f;
}

double quad_slope(const Quadratic& q, std::span<const double> x, std::span<const double> d) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (q.c[i] * x[i] - q.b[i]) * d[i];
  return s;
}

}  // namespace

TEST_CASE("accepted steps satisfy both conditions on random quadratics") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> logc(-3.0, 3.0);
  const LineSearchConfig cfg;
  int accepted = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 10;
    Quadratic q;
    for (std::size_t i = 0; i < n; ++i) {
      q.c.push_back(std::pow(10.0, logc(rng)));
      q.b.push_back(u(rng));
    }
    Point x(n), d(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 3.0 * u(rng);
    const ObjectiveProblem p = q.problem();
    const Point g = p.gradient(x);
    // Random descent direction: -g plus a bounded perturbation.
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] * (1.0 + 0.5 * u(rng)) * std::pow(10.0, u(rng));
    if (dot(g, d) >= 0.0) continue;
    const LineSearchResult r = wolfe_search(p, x, d, p.value(x), g, cfg);
    REQUIRE(r.ok());
    ++accepted;
    Point xn(n);
    for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + r.lambda * d[i];
    const double f0 = quad_value(q, x);
    const double slope0 = quad_slope(q, x, d);
    const double f1 = quad_value(q, xn);
    CHECK(f1 <= f0 + cfg.sigma1 * r.lambda * slope0 + 1e-12 * std::max(1.0, std::abs(f0)));
    CHECK(quad_slope(q, xn, d) >= cfg.sigma2 * slope0 - 1e-12 * std::abs(slope0));
    CHECK(r.f_new == doctest::Approx(f1).epsilon(1e-12));
  }
  CHECK(accepted > 900);
}

TEST_CASE("non-descent direction is a contract violation") {
  const Quadratic q{{1.0, 1.0}, {0.0, 0.0}};
  const ObjectiveProblem p = q.problem();
  const Point x{1.0, 1.0};
  const Point g = p.gradient(x);
  CHECK_THROWS_AS(wolfe_search(p, x, g, p.value(x), g, {}), ContractViolation);
  CHECK_THROWS_AS(wolfe_search(p, x, Point(2), p.value(x), g, {}), ContractViolation);
  LineSearchConfig nm;
  nm.mode = LineSearchMode::nonmonotone;
  CHECK_THROWS_AS(wolfe_search(p, x, -g, p.value(x), g, nm), ContractViolation);
}

TEST_CASE("configuration validation") {
  LineSearchConfig cfg;
  cfg.sigma1 = 0.95;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.sigma2 = 1e-5;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.max_trials = 0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.p = 1.5;
  CHECK_THROWS(cfg.validate());
  CHECK_NOTHROW(LineSearchConfig{}.validate());
}

TEST_CASE("reference value uses the newest window of history") {
  LineSearchConfig cfg;
  cfg.mode = LineSearchMode::nonmonotone;
  cfg.M0 = 2;
  const std::vector<double> hist{100.0, 5.0, 7.0, 6.0};
  CHECK(reference_value(6.0, hist, cfg) == 7.0);
  cfg.M0 = 3;
  CHECK(reference_value(6.0, hist, cfg) == 100.0);
  cfg.mode = LineSearchMode::monotone;
  CHECK(reference_value(6.0, hist, cfg) == 6.0);
}

TEST_CASE("reference value is never below the current value") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  LineSearchConfig cfg;
  cfg.mode = LineSearchMode::nonmonotone;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> hist(1 + rng() % 8);
    for (auto& v : hist) v = u(rng);
    cfg.M0 = rng() % 6;
    CHECK(reference_value(hist.back(), hist, cfg) >= hist.back());
  }
}

TEST_CASE("curvature factor") {
  LineSearchConfig cfg;
  CHECK(curvature_factor(0.3, 2.0, cfg) == cfg.sigma2);
  cfg.mode = LineSearchMode::nonmonotone;
  cfg.p = 0.5;
  // 1 - (0.04)^0.5 = 0.8 < sigma2
  CHECK(curvature_factor(0.04, 1.0, cfg) == cfg.sigma2);
  // 1 - (0.0001)^0.5 = 0.99 > sigma2
  CHECK(curvature_factor(1e-4, 1.0, cfg) == doctest::Approx(0.99));
  // Large negative p collapses to sigma2 whenever lambda ||d|| < 1.
  cfg.p = -50.0;
  CHECK(curvature_factor(0.5, 1.0, cfg) == cfg.sigma2);
  CHECK(curvature_factor(0.5, 1.9, cfg) == cfg.sigma2);
}

TEST_CASE("nonmonotone search with collapsed curvature matches monotone search") {
  const Quadratic q{{1.0, 4.0, 9.0}, {0.1, -0.2, 0.3}};
  const ObjectiveProblem p = q.problem();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LineSearchConfig mono;
  mono.initial_step = 0.05;
  LineSearchConfig nm = mono;
  nm.mode = LineSearchMode::nonmonotone;
  nm.p = -60.0;
  nm.lambda_max = 0.9;  // keeps lambda ||d|| < 1 for the unit directions below
  mono.lambda_max = 0.9;
  for (int t = 0; t < 100; ++t) {
    Point x{u(rng), u(rng), u(rng)};
    const Point g = p.gradient(x);
    Point d = -g;
    d *= 1.0 / norm2(d);
    const double f = p.value(x);
    const std::vector<double> hist{f};  // window of one: reference equals f_x
    const LineSearchResult a = wolfe_search(p, x, d, f, g, mono);
    const LineSearchResult b = wolfe_search(p, x, d, f, g, nm, hist);
    CHECK(a.status == b.status);
    CHECK(a.lambda == b.lambda);
    CHECK(a.trials == b.trials);
  }
}

TEST_CASE("nonmonotone reference admits a step that increases f") {
  const Quadratic q{{1.0}, {0.0}};
  const ObjectiveProblem p = q.problem();
  const Point x{1.0};
  const Point g = p.gradient(x);
  const Point d{-3.0};  // lambda = 1 lands at -2, f rises from 0.5 to 2
  LineSearchConfig cfg;
  cfg.mode = LineSearchMode::nonmonotone;
  cfg.M0 = 3;
  const std::vector<double> hist{10.0, 0.5};
  const LineSearchResult r = wolfe_search(p, x, d, 0.5, g, cfg, hist);
  REQUIRE(r.ok());
  CHECK(r.lambda == 1.0);
  CHECK(r.f_new > 0.5);
}

TEST_CASE("unbounded direction stops at lambda_max and reports failure") {
  const ObjectiveProblem p(1, [](std::span<const double> x, std::span<double> g) {
    if (!g.empty()) g[0] = -1.0;
    return -x[0];
  });
  LineSearchConfig cfg;
  cfg.lambda_max = 1e3;
  const LineSearchResult r = wolfe_search(p, Point{0.0}, Point{1.0}, 0.0, Point{-1.0}, cfg);
  CHECK_FALSE(r.ok());
  CHECK(r.has_fallback());
  CHECK(r.lambda == 1e3);
}

TEST_CASE("non-finite trial values are treated as too long") {
  const ObjectiveProblem p(1, [](std::span<const double> x, std::span<double> g) {
    if (x[0] > 0.5) {
      if (!g.empty()) g[0] = std::numeric_limits<double>::quiet_NaN();
      return std::numeric_limits<double>::infinity();
    }
    if (!g.empty()) g[0] = 2.0 * (x[0] - 0.4);
    return (x[0] - 0.4) * (x[0] - 0.4);
  });
  const Point x{0.0};
  const Point g = p.gradient(x);
  const LineSearchResult r = wolfe_search(p, x, Point{1.0}, p.value(x), g, {});
  REQUIRE(r.ok());
  CHECK(r.lambda <= 0.5);
  CHECK(std::isfinite(r.f_new));
}
