#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "qn/errors.hpp"

namespace qn {

/// A point in R^n. The length is fixed at construction.
class Point {
 public:
  Point() = default;
  explicit Point(std::size_t n, double fill = 0.0) : v_(n, fill) {}
  Point(std::initializer_list<double> init) : v_(init) {}
  explicit Point(std::vector<double> v) : v_(std::move(v)) {}
  explicit Point(std::span<const double> v) : v_(v.begin(), v.end()) {}

  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  std::span<double> span() { return v_; }
  std::span<const double> span() const { return v_; }
  operator std::span<const double>() const { return v_; }
  const std::vector<double>& values() const { return v_; }

  bool all_finite() const;

  Point& operator+=(const Point& o);
  Point& operator-=(const Point& o);
  Point& operator*=(double a);

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::vector<double> v_;
};

Point operator+(Point a, const Point& b);
Point operator-(Point a, const Point& b);
Point operator*(double a, Point b);
Point operator-(Point a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

/// Dense symmetric matrix. Entries are stored in full so that a caller who
/// builds one from raw data can still be checked for symmetry.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t order) : n_(order), a_(order * order, 0.0) {}

  /// Wraps row-major data as-is; symmetry is not enforced here.
  static SymmetricMatrix from_dense(std::size_t order, std::vector<double> row_major);
  static SymmetricMatrix identity(std::size_t order);

  std::size_t order() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  /// Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double value);
  /// Adds to both (i,j) and (j,i) (once on the diagonal).
  void add(std::size_t i, std::size_t j, double value);
  bool is_symmetric() const;
  std::span<const double> row_major() const { return a_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Objective function bundle: value, gradient and an optional Hessian over R^n.
///
/// The callables must be pure. `evaluate` is the primary entry point: it
/// returns f(x) and writes the gradient into `grad` when `grad` is non-empty.
class ObjectiveProblem {
 public:
  using EvalFn = std::function<double(std::span<const double> x, std::span<double> grad)>;
  using HessianFn = std::function<SymmetricMatrix(std::span<const double> x)>;

  ObjectiveProblem() = default;
  ObjectiveProblem(std::size_t dimension, EvalFn eval, HessianFn hessian = {});

  std::size_t dimension() const { return n_; }
  bool has_hessian() const { return static_cast<bool>(hess_); }

  double value(std::span<const double> x) const;
  Point gradient(std::span<const double> x) const;
  /// Returns f(x) and overwrites `grad` (length must equal dimension).
  double evaluate(std::span<const double> x, std::span<double> grad) const;
  SymmetricMatrix hessian(std::span<const double> x) const;

 private:
  void check_point(std::span<const double> x) const;

  std::size_t n_ = 0;
  EvalFn eval_;
  HessianFn hess_;
};

/// h = rel * max(1, ||x||); the step used by the finite-difference gates.
double scaled_step(std::span<const double> x, double rel = 1e-6);

/// Central-difference gradient.
Point fd_gradient(const ObjectiveProblem& p, std::span<const double> x, double h);

/// Central-difference Hessian from function values only, symmetrized.
SymmetricMatrix fd_hessian(const ObjectiveProblem& p, std::span<const double> x, double h);

/// Eigenvalues of a small dense symmetric matrix in descending order (cyclic Jacobi).
std::vector<double> sym_eigenvalues(const SymmetricMatrix& m, std::size_t max_order = 64);

/// Largest |analytic - numeric| over components, divided by max(1, ||numeric||_inf).
double gradient_mismatch(std::span<const double> analytic, std::span<const double> numeric);

}  // namespace qn
