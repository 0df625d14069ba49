#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "qn/numeric.hpp"

using namespace qn;

TEST_CASE("dot and norms") {
  const Point a{3.0, 4.0};
  const Point b{1.0, -2.0};
  CHECK(dot(a, b) == doctest::Approx(-5.0));
  CHECK(norm2(a) == doctest::Approx(5.0));
  CHECK(norm_inf(b) == 2.0);
  CHECK_THROWS_AS(dot(a, Point{1.0}), DimensionError);
}

TEST_CASE("norm2 does not overflow on large entries") {
  const Point big{3e200, 4e200};
  CHECK(norm2(big) == doctest::Approx(5e200));
  const Point tiny{3e-200, 4e-200};
  CHECK(norm2(tiny) == doctest::Approx(5e-200));
  CHECK(norm2(Point(3)) == 0.0);
}

TEST_CASE("axpy and point arithmetic") {
  Point y{1.0, 1.0};
  axpy(2.0, Point{1.0, -1.0}, y.span());
  CHECK(y == Point{3.0, -1.0});
  CHECK((y - Point{3.0, -1.0}) == Point(2));
  CHECK((2.0 * y) == Point{6.0, -2.0});
  CHECK_THROWS_AS(y += Point{1.0}, DimensionError);
  Point bad{1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_FALSE(bad.all_finite());
}

TEST_CASE("symmetric matrix mutation keeps symmetry") {
  SymmetricMatrix m(3);
  m.set(0, 2, 1.5);
  m.add(1, 1, 2.0);
  m.add(0, 2, 0.5);
  CHECK(m(2, 0) == 2.0);
  CHECK(m(0, 2) == 2.0);
  CHECK(m(1, 1) == 2.0);
  CHECK(m.is_symmetric());
  CHECK_FALSE(SymmetricMatrix::from_dense(2, {1, 2, 3, 4}).is_symmetric());
  CHECK_THROWS_AS(SymmetricMatrix::from_dense(2, {1, 2, 3}), DimensionError);
}

namespace {

ObjectiveProblem rotated_quadratic() {
  // f = x0^2 + 3 x0 x1 + 5 x1^2 + sin(x2)
  return ObjectiveProblem(
      3,
      [](std::span<const double> x, std::span<double> g) {
        if (!g.empty()) {
          g[0] = 2 * x[0] + 3 * x[1];
          g[1] = 3 * x[0] + 10 * x[1];
          g[2] = std::cos(x[2]);
        }
        return x[0] * x[0] + 3 * x[0] * x[1] + 5 * x[1] * x[1] + std::sin(x[2]);
      });
}

}  // namespace

TEST_CASE("objective problem checks dimensions and hessian availability") {
  const ObjectiveProblem p = rotated_quadratic();
  CHECK(p.dimension() == 3);
  CHECK_FALSE(p.has_hessian());
  CHECK_THROWS_AS(p.value(Point{1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(p.hessian(Point(3)), ContractViolation);
  Point g(2);
  CHECK_THROWS_AS(p.evaluate(Point(3), g.span()), DimensionError);
}

TEST_CASE("central differences recover analytic derivatives") {
  const ObjectiveProblem p = rotated_quadratic();
  const Point x{0.3, -1.2, 0.7};
  const Point fd = fd_gradient(p, x, scaled_step(x));
  CHECK(gradient_mismatch(p.gradient(x), fd) < 1e-8);

  const SymmetricMatrix h = fd_hessian(p, x, 1e-4);
  CHECK(h.is_symmetric());
  CHECK(h(0, 0) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(h(0, 1) == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(h(1, 1) == doctest::Approx(10.0).epsilon(1e-5));
  CHECK(h(2, 2) == doctest::Approx(-std::sin(0.7)).epsilon(1e-4));
}

TEST_CASE("finite differences report the failing component") {
  const ObjectiveProblem p(2, [](std::span<const double> x, std::span<double>) {
    return x[1] > 0.5 ? std::numeric_limits<double>::infinity() : x[0];
  });
  try {
    (void)fd_gradient(p, Point{0.0, 0.5}, 0.1);
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("gradient mismatch is relative to the numeric scale") {
  CHECK(gradient_mismatch(Point{1.0, 2.0}, Point{1.0, 2.0}) == 0.0);
  CHECK(gradient_mismatch(Point{1000.0}, Point{1001.0}) == doctest::Approx(1.0 / 1001.0));
  CHECK(gradient_mismatch(Point{0.0}, Point{1e-3}) == doctest::Approx(1e-3));
}

TEST_CASE("Jacobi eigenvalues match spectra built from random rotations") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (std::size_t n : {1u, 2u, 5u, 12u, 30u}) {
    std::vector<double> lambda(n);
    for (auto& v : lambda) v = u(rng);
    const oracle::Dense q = oracle::random_orthogonal(n, rng);
    oracle::Dense a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) a[i * n + j] += q[i * n + k] * lambda[k] * q[j * n + k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) a[i * n + j] = a[j * n + i];
    const std::vector<double> ev = sym_eigenvalues(SymmetricMatrix::from_dense(n, a));
    std::sort(lambda.begin(), lambda.end(), std::greater<>());
    REQUIRE(ev.size() == n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ev[i] - lambda[i]) <= 1e-8 * std::max(1.0, std::abs(lambda[i])));
  }
}

TEST_CASE("eigen solver rejects oversize or non-symmetric input") {
  CHECK_THROWS_AS(sym_eigenvalues(SymmetricMatrix(65)), UnsupportedSize);
  CHECK_NOTHROW(sym_eigenvalues(SymmetricMatrix(65), 65));
  CHECK_THROWS_AS(sym_eigenvalues(SymmetricMatrix::from_dense(2, {1, 2, 0, 1})), ContractViolation);
}

TEST_CASE("eigenvalues are invariant under permutation similarity") {
  const SymmetricMatrix a = SymmetricMatrix::from_dense(3, {4, 1, 0, 1, 3, 1, 0, 1, 2});
  const SymmetricMatrix b = SymmetricMatrix::from_dense(3, {2, 1, 0, 1, 3, 1, 0, 1, 4});
  const auto ea = sym_eigenvalues(a);
  const auto eb = sym_eigenvalues(b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ea[i] == doctest::Approx(eb[i]).epsilon(1e-12));
  double trace = 0.0;
  for (double v : ea) trace += v;
  CHECK(trace == doctest::Approx(9.0).epsilon(1e-12));
}
