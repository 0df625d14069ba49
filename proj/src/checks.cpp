#include "qn/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "qn/bench.hpp"

namespace qn {

namespace {

const ZipperReference kZipperOne{
    {-69.7747, 140.135, 365.852, -752.075, -285.005, 3576.69},
    {66.4497, -10.415,  -27.1845, 0,        0,        0,
     -10.415, 82.2093,  54.6557,  0,        0,        0,
     -27.1845, 54.6557, 203.929,  0,        0,        0,
     0,       0,        0,        380.664,  -4.02618, -159.578,
     0,       0,        0,        -4.02618, 369.586,  -25.5081,
     0,       0,        0,        -159.578, -25.5081, 1048.02},
    {1085.02, 372.093, 341.157, 230.049, 61.2695, 61.2695}};

const ZipperReference kZipperTwo{
    {-46.8782, 133.142, 397.798, -401.192, -182.604, 3436.46},
    {66.1163,  -6.0961, -18.2092, 0,        0,        0,
     -6.0961,  81.3119, 51.7918,  0,        0,        0,
     -18.2092, 51.7918, 218.677,  0,        0,        0,
     0,        0,       0,        339.302,  -2.9188,  -85.8315,
     0,        0,       0,        -2.9188,  361.487,  -2.99786,
     0,        0,       0,        -85.8315, -2.99786, 1034.38},
    {1044.83, 361.8, 328.538, 238.159, 63.973, 63.973}};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::vector<CheckResult> regression_checks(ZipperId id) {
  const std::string tag = id == ZipperId::one ? "zipper 1" : "zipper 2";
  const ZipperReference& ref = zipper_reference(id);
  const ZipperBundle b = build_zipper(id);
  const Point& x0 = b.instance.x0;
  std::vector<CheckResult> out;

  const Point g = b.penalty.gradient(x0);
  double worst = 0.0;
  for (std::size_t i = 0; i < 6; ++i) worst = std::max(worst, rel_err(g[i], ref.gradient[i]));
  out.push_back({tag + " gradient at x0", worst <= 1e-2, fmt("max rel err %.3g", worst)});

  const SymmetricMatrix h = b.penalty.hessian(x0);
  worst = 0.0;
  double zero_leak = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const double want = ref.hessian[6 * i + j];
      if (want == 0.0) zero_leak = std::max(zero_leak, std::abs(h(i, j)));
      else worst = std::max(worst, rel_err(h(i, j), want));
    }
  }
  out.push_back({tag + " Hessian at x0", worst <= 1e-2 && zero_leak <= 1e-9,
                 fmt("max rel err %.3g, off-block max %.3g", worst, zero_leak)});

  const std::vector<double> ev = sym_eigenvalues(h);
  worst = 0.0;
  for (std::size_t i = 0; i < 6; ++i) worst = std::max(worst, std::abs(ev[i] - ref.eigenvalues[i]));
  out.push_back({tag + " Hessian eigenvalues", worst <= 0.5, fmt("max abs err %.3g", worst)});

  const auto d = contact_distances(b.instance, b.instance.reported_solution);
  out.push_back({tag + " reported solution in band", within_band(d, b.instance.target),
                 fmt("distances %.3f .. %.3f", *std::min_element(d.begin(), d.end()),
                     *std::max_element(d.begin(), d.end()))});
  return out;
}

// Explicit product form: H <- V^T H V + omega s s^T with V = I - omega y* s^T.
std::vector<double> dense_inverse_hessian(std::span<const MemoryPair> pairs, double h0,
                                          std::size_t n) {
  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = h0;
  std::vector<double> V(n * n), T(n * n);
  for (const auto& mp : pairs) {
    const double w = mp.omega_star;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        V[i * n + j] = (i == j ? 1.0 : 0.0) - w * mp.y_star[i] * mp.s[j];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += H[i * n + k] * V[k * n + j];
        T[i * n + j] = acc;
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += V[k * n + i] * T[k * n + j];
        H[i * n + j] = acc + w * mp.s[i] * mp.s[j];
      }
  }
  return H;
}

CheckResult two_loop_check() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng() % 8;
    const std::size_t m = 1 + rng() % 4;
    std::vector<MemoryPair> pairs;
    while (pairs.size() < m) {
      Point s(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = u(rng);
        y[i] = u(rng);
      }
      const double gamma = 0.5 + std::abs(u(rng));
      update_memory(pairs, s, y, gamma, m);
    }
    Point g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = u(rng);
    const double h0 = 0.1 + std::abs(u(rng));
    const Point fast = apply_inverse_hessian(pairs, h0, g);
    const std::vector<double> H = dense_inverse_hessian(pairs, h0, n);
    Point slow(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) slow[i] += H[i * n + j] * g[j];
    worst = std::max(worst, norm_inf(fast - slow) / std::max(1.0, norm_inf(slow)));
  }
  return {"two-loop matches explicit product form", worst <= 1e-12, fmt("max rel err %.3g", worst)};
}

CheckResult gradient_gate_check() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  std::string worst_name;
  auto probe = [&](const std::string& name, const ObjectiveProblem& p, const Point& center) {
    for (int k = 0; k < 5; ++k) {
      Point x = center;
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += u(rng);
      const double e =
          gradient_mismatch(p.gradient(x), fd_gradient(p, x, scaled_step(x)));
      if (e > worst) {
        worst = e;
        worst_name = name;
      }
    }
  };
  for (ZipperId id : {ZipperId::one, ZipperId::two}) {
    const ZipperBundle b = build_zipper(id);
    probe("zipper-lj", b.lj, b.instance.x0);
    probe("zipper-penalty", b.penalty, b.instance.x0);
  }
  static constexpr std::size_t dims[] = {8};
  for (const auto& bp : corpus(dims)) probe(bp.name, bp.objective, bp.x0);
  return {"finite-difference gradient gates", worst <= 1e-4,
          fmt("max mismatch %.3g", worst) + (worst_name.empty() ? "" : " (" + worst_name + ")")};
}

std::vector<CheckResult> solve_checks() {
  std::vector<CheckResult> out;
  for (ZipperId id : {ZipperId::one, ZipperId::two}) {
    const std::string tag = id == ZipperId::one ? "zipper 1" : "zipper 2";
    try {
      const ZipperSolution s = solve_zipper(id, zipper_solver_config());
      const bool ok = s.feasible && s.gnorm <= 1e-6 && s.trace.iterations() <= 500;
      out.push_back({tag + " solve", ok,
                     fmt("%.0f iterations, |g| = %.3g", static_cast<double>(s.trace.iterations()),
                         s.gnorm)});
    } catch (const Error& e) {
      out.push_back({tag + " solve", false, e.what()});
    }
  }
  return out;
}

}  // namespace

const ZipperReference& zipper_reference(ZipperId id) {
  return id == ZipperId::one ? kZipperOne : kZipperTwo;
}

std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> out;
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      out.push_back({name, false, e.what()});
    }
  };
  for (ZipperId id : {ZipperId::one, ZipperId::two})
    guarded("zipper regression", [&] {
      for (auto& r : regression_checks(id)) out.push_back(std::move(r));
    });
  guarded("two-loop", [&] { out.push_back(two_loop_check()); });
  guarded("gradient gates", [&] { out.push_back(gradient_gate_check()); });
  guarded("zipper solves", [&] {
    for (auto& r : solve_checks()) out.push_back(std::move(r));
  });
  return out;
}

}  // namespace qn
