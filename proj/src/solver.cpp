#include "qn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <deque>
#include <ostream>

namespace qn {

void SolverConfig::validate() const {
  if (m1 == 0) throw DomainError("memory depth m1 must be positive");
  if (!(grad_tol >= 0.0)) throw DomainError("grad_tol must be nonnegative");
  if (!(gamma_max >= 0.0)) throw DomainError("gamma_max must be nonnegative");
  if (!(curvature_floor >= 0.0)) throw DomainError("curvature_floor must be nonnegative");
  line_search.validate();
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::max_iters:
      return "max_iters";
    case Termination::line_search_failure:
      return "line_search_failure";
  }
  return "unknown";
}

Point apply_inverse_hessian(std::span<const MemoryPair> pairs, double h0_scale,
                            std::span<const double> g) {
  if (!(h0_scale > 0.0)) throw ContractViolation("initial inverse-Hessian scale must be positive");
  for (const auto& mp : pairs) {
    if (mp.s.size() != g.size() || mp.y_star.size() != g.size())
      throw DimensionError("memory pair length differs from gradient length");
    if (!(mp.omega_star > 0.0) || !std::isfinite(mp.omega_star))
      throw ContractViolation("memory pair without positive curvature");
  }

  const std::size_t m = pairs.size();
  std::vector<double> alpha(m);
  Point q(g);
  for (std::size_t i = m; i-- > 0;) {
    alpha[i] = pairs[i].omega_star * dot(pairs[i].s, q);
    axpy(-alpha[i], pairs[i].y_star, q.span());
  }
  q *= h0_scale;
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = pairs[i].omega_star * dot(pairs[i].y_star, q);
    axpy(alpha[i] - beta, pairs[i].s, q.span());
  }
  return q;
}

UpdateOutcome update_memory(std::vector<MemoryPair>& pairs, std::span<const double> s,
                            std::span<const double> y, double gamma, std::size_t m1,
                            double curvature_floor) {
  if (s.size() != y.size()) throw DimensionError("update_memory: s and y lengths differ");
  Point y_star(y);
  axpy(gamma, s, y_star.span());
  const double sy = dot(s, y_star);
  const double floor = curvature_floor * norm2(s) * norm2(y_star);
  if (!(sy > floor) || !std::isfinite(sy)) return UpdateOutcome::skipped;

  pairs.push_back(MemoryPair{Point(s), std::move(y_star), 1.0 / sy});
  if (pairs.size() > m1) pairs.erase(pairs.begin(), pairs.end() - static_cast<std::ptrdiff_t>(m1));
  return UpdateOutcome::stored;
}

namespace {

double h0_scale(const std::vector<MemoryPair>& pairs, H0Mode mode) {
  if (mode == H0Mode::fixed_identity || pairs.empty()) return 1.0;
  const MemoryPair& newest = pairs.back();
  const double yy = dot(newest.y_star, newest.y_star);
  return 1.0 / (newest.omega_star * yy);
}

}  // namespace

SolveResult solve(const ObjectiveProblem& p, const Point& x0, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n = p.dimension();
  if (x0.size() != n) throw DimensionError("initial point length differs from problem dimension");
  if (!x0.all_finite()) throw DomainError("initial point must be finite");

  const auto wall_start = std::chrono::steady_clock::now();
  const std::clock_t cpu_start = std::clock();

  SolveResult out;
  SolverTrace& trace = out.trace;

  Point x = x0;
  Point g(n);
  double f = 0.0;
  try {
    f = p.evaluate(x.span(), g.span());
  } catch (const Error& e) {
    throw SolverError(0, e.what());
  }
  trace.evaluations = 1;
  if (!std::isfinite(f)) throw SolverError(0, "objective is not finite at the initial point");

  const double g0_norm = norm2(g);
  trace.tolerance = cfg.grad_tol_relative ? cfg.grad_tol * std::max(1.0, g0_norm) : cfg.grad_tol;

  std::vector<MemoryPair> pairs;
  std::deque<double> history{f};
  const std::size_t window = cfg.line_search.M0 + 1;
  std::size_t ls_failures = 0;
  bool force_reset = false;

  for (std::size_t k = 0;; ++k) {
    const double gnorm = norm2(g);
    if (gnorm <= trace.tolerance) {
      trace.reason = Termination::converged;
      break;
    }
    if (k >= cfg.max_iters) {
      trace.reason = Termination::max_iters;
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.f = f;
    rec.gnorm = gnorm;
    if (force_reset) {
      pairs.clear();
      rec.reset = true;
      force_reset = false;
    }

    const std::vector<double> hist(history.begin(), history.end());
    auto search = [&](const Point& d) {
      LineSearchConfig lsc = cfg.line_search;
      // Steepest-descent steps start at unit length rather than lambda = 1.
      if (pairs.empty()) lsc.initial_step = std::min(lsc.initial_step, 1.0 / gnorm);
      try {
        return wolfe_search(p, x.span(), d.span(), f, g.span(), lsc, hist);
      } catch (const ContractViolation&) {
        throw;
      } catch (const Error& e) {
        throw SolverError(k, e.what());
      }
    };

    Point d = -apply_inverse_hessian(pairs,
                                     h0_scale(pairs, cfg.h0_mode), g.span());
    const double gd = dot(g, d);
    if (!pairs.empty() && (!(gd < 0.0) || !std::isfinite(gd))) {
      pairs.clear();
      rec.reset = true;
      d = -g;
    }

    LineSearchResult ls = search(d);
    trace.evaluations += ls.trials;
    if (!ls.ok() && !ls.has_fallback() && !pairs.empty()) {
      // Quasi-Newton direction produced no decrease at all: retry along -g.
      pairs.clear();
      rec.reset = true;
      d = -g;
      ls = search(d);
      trace.evaluations += ls.trials;
    }
    if (!ls.ok() && !ls.has_fallback()) {
      trace.reason = Termination::line_search_failure;
      break;
    }

    const MemoryPair* stored = nullptr;
    if (ls.ok()) {
      ls_failures = 0;
      const Point s = ls.x_new - x;
      const Point y = ls.g_new - g;
      const double gamma =
          cfg.update == SecantUpdate::modified ? std::min(gnorm, cfg.gamma_max) : 0.0;
      if (update_memory(pairs, s, y, gamma, cfg.m1, cfg.curvature_floor) ==
          UpdateOutcome::stored) {
        stored = &pairs.back();
      }
    } else {
      rec.ls_failed = true;
      if (++ls_failures >= cfg.max_ls_failures) {
        force_reset = true;
        ls_failures = 0;
      }
    }
    rec.lambda = ls.lambda;
    rec.trials = ls.trials;
    rec.skipped = stored == nullptr;
    trace.records.push_back(rec);

    if (cfg.observer) cfg.observer(StepEvent{k, x.span(), d.span(), f, g.span(), hist, ls, stored});

    x = std::move(ls.x_new);
    g = std::move(ls.g_new);
    f = ls.f_new;
    history.push_back(f);
    while (history.size() > window) history.pop_front();
  }

  trace.final_f = f;
  trace.final_gnorm = norm2(g);
  trace.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  trace.cpu_seconds = static_cast<double>(std::clock() - cpu_start) / CLOCKS_PER_SEC;
  out.x = std::move(x);
  out.f = f;
  return out;
}

RateFit check_rlinear(const SolverTrace& trace, double f_star) {
  std::vector<double> fk;
  fk.reserve(trace.records.size() + 1);
  for (const auto& r : trace.records) fk.push_back(r.f);
  fk.push_back(trace.final_f);

  std::vector<double> ks;
  std::vector<double> logs;
  for (std::size_t k = fk.size() / 2; k < fk.size(); ++k) {
    const double gap = fk[k] - f_star;
    if (gap > 0.0 && std::isfinite(gap)) {
      ks.push_back(static_cast<double>(k));
      logs.push_back(std::log(gap));
    }
  }
  if (ks.size() < 6) {
    throw InsufficientData("R-linear fit needs at least 6 tail iterations, have " +
                           std::to_string(ks.size()));
  }
  const double m = static_cast<double>(ks.size());
  double mk = 0.0;
  double ml = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    ml += logs[i];
  }
  mk /= m;
  ml /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += (ks[i] - mk) * (logs[i] - ml);
    sxx += (ks[i] - mk) * (ks[i] - mk);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.rate = std::exp(fit.slope);
  fit.points = ks.size();
  return fit;
}

RateFit check_rlinear(const SolverTrace& trace) { return check_rlinear(trace, trace.final_f); }

void write_trace_csv(std::ostream& out, const SolverTrace& trace) {
  out << "k,f,gnorm,lambda,trials,skipped\n";
  const auto old_prec = out.precision(17);
  for (const auto& r : trace.records) {
    out << r.k << ',' << r.f << ',' << r.gnorm << ',' << r.lambda << ',' << r.trials << ','
        << (r.skipped ? 1 : 0) << '\n';
  }
  out.precision(old_prec);
}

}  // namespace qn
