#include "qn/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qn {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

}  // namespace

bool Point::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

Point& Point::operator+=(const Point& o) {
  require_same_length(size(), o.size(), "Point +=");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

Point& Point::operator-=(const Point& o) {
  require_same_length(size(), o.size(), "Point -=");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

Point& Point::operator*=(double a) {
  for (double& x : v_) x *= a;
  return *this;
}

Point operator+(Point a, const Point& b) { return a += b; }
Point operator-(Point a, const Point& b) { return a -= b; }
Point operator*(double a, Point b) { return b *= a; }
Point operator-(Point a) { return a *= -1.0; }

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) {
  // Scaled accumulation so that huge coordinates (penalty problems) do not overflow.
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : a) {
    const double t = x / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_same_length(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

SymmetricMatrix SymmetricMatrix::from_dense(std::size_t order, std::vector<double> row_major) {
  require_same_length(row_major.size(), order * order, "SymmetricMatrix::from_dense");
  SymmetricMatrix m;
  m.n_ = order;
  m.a_ = std::move(row_major);
  return m;
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t order) {
  SymmetricMatrix m(order);
  for (std::size_t i = 0; i < order; ++i) m.a_[i * order + i] = 1.0;
  return m;
}

void SymmetricMatrix::set(std::size_t i, std::size_t j, double value) {
  a_[i * n_ + j] = value;
  a_[j * n_ + i] = value;
}

void SymmetricMatrix::add(std::size_t i, std::size_t j, double value) {
  a_[i * n_ + j] += value;
  if (i != j) a_[j * n_ + i] += value;
}

bool SymmetricMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (a_[i * n_ + j] != a_[j * n_ + i]) return false;
  return true;
}

ObjectiveProblem::ObjectiveProblem(std::size_t dimension, EvalFn eval, HessianFn hessian)
    : n_(dimension), eval_(std::move(eval)), hess_(std::move(hessian)) {
  if (n_ == 0) throw DimensionError("objective dimension must be positive");
  if (!eval_) throw ContractViolation("objective requires an evaluation function");
}

void ObjectiveProblem::check_point(std::span<const double> x) const {
  require_same_length(x.size(), n_, "objective argument");
}

double ObjectiveProblem::value(std::span<const double> x) const {
  check_point(x);
  return eval_(x, {});
}

Point ObjectiveProblem::gradient(std::span<const double> x) const {
  Point g(n_);
  evaluate(x, g.span());
  return g;
}

double ObjectiveProblem::evaluate(std::span<const double> x, std::span<double> grad) const {
  check_point(x);
  require_same_length(grad.size(), n_, "objective gradient buffer");
  return eval_(x, grad);
}

SymmetricMatrix ObjectiveProblem::hessian(std::span<const double> x) const {
  check_point(x);
  if (!hess_) throw ContractViolation("objective has no analytic Hessian");
  return hess_(x);
}

double scaled_step(std::span<const double> x, double rel) {
  return rel * std::max(1.0, norm2(x));
}

namespace {

double probe(const ObjectiveProblem& p, const Point& x, std::size_t component) {
  const double f = p.value(x);
  if (!std::isfinite(f)) {
    throw EvaluationError("non-finite objective while probing component " +
                          std::to_string(component));
  }
  return f;
}

}  // namespace

Point fd_gradient(const ObjectiveProblem& p, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  Point xp(x);
  Point g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = xp[i];
    xp[i] = xi + h;
    const double fp = probe(p, xp, i);
    xp[i] = xi - h;
    const double fm = probe(p, xp, i);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

SymmetricMatrix fd_hessian(const ObjectiveProblem& p, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const std::size_t n = x.size();
  Point xp(x);
  const double f0 = probe(p, xp, 0);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = xp[i];
    xp[i] = xi + h;
    const double fp = probe(p, xp, i);
    xp[i] = xi - h;
    const double fm = probe(p, xp, i);
    xp[i] = xi;
    a[i * n + i] = (fp - 2.0 * f0 + fm) / (h * h);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double xj = xp[j];
      double f[4];
      const double si[4] = {h, h, -h, -h};
      const double sj[4] = {h, -h, h, -h};
      for (int c = 0; c < 4; ++c) {
        xp[i] = xi + si[c];
        xp[j] = xj + sj[c];
        f[c] = probe(p, xp, j);
      }
      xp[i] = xi;
      xp[j] = xj;
      const double hij = (f[0] - f[1] - f[2] + f[3]) / (4.0 * h * h);
      a[i * n + j] = hij;
      a[j * n + i] = hij;
    }
  }
  // Symmetrize as (H + H^T)/2; exact because both halves were written identically.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (a[i * n + j] + a[j * n + i]);
      a[i * n + j] = s;
      a[j * n + i] = s;
    }
  return SymmetricMatrix::from_dense(n, std::move(a));
}

std::vector<double> sym_eigenvalues(const SymmetricMatrix& m, std::size_t max_order) {
  const std::size_t n = m.order();
  if (n > max_order) {
    throw UnsupportedSize("eigenvalue solver limited to order " + std::to_string(max_order));
  }
  if (!m.is_symmetric()) throw ContractViolation("matrix storage is not symmetric");

  std::vector<double> a(m.row_major().begin(), m.row_major().end());
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  // Cyclic Jacobi sweeps until the off-diagonal mass is negligible.
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += at(i, i) * at(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    }
    if (off <= 1e-34 * std::max(diag, 1e-300)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

double gradient_mismatch(std::span<const double> analytic, std::span<const double> numeric) {
  require_same_length(analytic.size(), numeric.size(), "gradient_mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]));
  return worst / std::max(1.0, norm_inf(numeric));
}

}  // namespace qn
