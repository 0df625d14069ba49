#include "qn/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <sstream>

namespace qn {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

void require_positive_r(double r) {
  if (!(r > 0.0)) throw DomainError("pair distance must be positive, got " + std::to_string(r));
}

}  // namespace

void LJParams::validate() const {
  if (!(epsilon > 0.0) || !(sigma > 0.0))
    throw DomainError("LJ parameters require epsilon > 0 and sigma > 0");
}

void AB1210Params::validate() const {
  if (A < 0.0 || B < 0.0 || C < 0.0 || D < 0.0)
    throw DomainError("pair coefficients must be nonnegative");
}

double lj_pair(double r, const LJParams& p) {
  p.validate();
  require_positive_r(r);
  const double s6 = std::pow(p.sigma / r, 6);
  return 4.0 * p.epsilon * (s6 * s6 - s6);
}

double ab_pair(double r, const AB1210Params& p) {
  p.validate();
  require_positive_r(r);
  const double r6 = std::pow(r, 6);
  return p.A / (r6 * r6) - p.B / r6;
}

double hb_pair(double r, const AB1210Params& p) {
  p.validate();
  require_positive_r(r);
  const double r2 = r * r;
  const double r10 = std::pow(r2, 5);
  return p.C / (r10 * r2) - p.D / r10;
}

double lj_cluster(std::span<const double> x, std::size_t atoms, std::span<double> grad) {
  if (atoms < 2) throw DomainError("LJ cluster needs at least two atoms");
  if (x.size() != 3 * atoms) throw DimensionError("LJ cluster expects 3N coordinates");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    if (grad.size() != x.size()) throw DimensionError("LJ cluster gradient buffer");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  double f = 0.0;
  for (std::size_t i = 1; i < atoms; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double r[3];
      double tau = 0.0;
      for (int c = 0; c < 3; ++c) {
        r[c] = x[3 * i + c] - x[3 * j + c];
        tau += r[c] * r[c];
      }
      if (tau == 0.0) throw SingularityError(i, j);
      const double inv3 = 1.0 / (tau * tau * tau);
      const double inv6 = inv3 * inv3;
      f += 4.0 * (inv6 - inv3);
      if (want_grad) {
        // d/dtau of 4(tau^-6 - tau^-3), times dtau/dx_i = 2 r
        const double dtau = 4.0 * (-6.0 * inv6 + 3.0 * inv3) / tau;
        for (int c = 0; c < 3; ++c) {
          const double gc = 2.0 * dtau * r[c];
          grad[3 * i + c] += gc;
          grad[3 * j + c] -= gc;
        }
      }
    }
  }
  return f;
}

ObjectiveProblem make_lj_cluster(std::size_t atoms) {
  if (atoms < 2) throw DomainError("LJ cluster needs at least two atoms");
  return ObjectiveProblem(3 * atoms, [atoms](std::span<const double> x, std::span<double> g) {
    return lj_cluster(x, atoms, g);
  });
}

DistanceConstraint DistanceConstraint::exact(std::size_t i, std::size_t j, double d, double w) {
  DistanceConstraint c;
  c.i = i;
  c.j = j;
  c.kind = ConstraintKind::exact;
  c.d = d;
  c.w = w;
  return c;
}

DistanceConstraint DistanceConstraint::interval(std::size_t i, std::size_t j, double l, double u,
                                                double w) {
  DistanceConstraint c;
  c.i = i;
  c.j = j;
  c.kind = ConstraintKind::interval;
  c.l = l;
  c.u = u;
  c.w = w;
  return c;
}

MdgpProblem::MdgpProblem(std::size_t atoms)
    : atoms_(atoms), eps_(3 * atoms, 0.0), fixed_(atoms, false), anchor_(atoms, Vec3{}) {
  if (atoms == 0) throw DomainError("distance-geometry problem needs at least one atom");
  rebuild_free();
}

void MdgpProblem::add_constraint(const DistanceConstraint& c) {
  if (c.i >= atoms_ || c.j >= atoms_) throw DomainError("constraint atom index out of range");
  if (c.i == c.j) throw DomainError("constraint must join two distinct atoms");
  if (!(c.w > 0.0)) throw DomainError("constraint weight must be positive");
  if (c.kind == ConstraintKind::exact && !(c.d > 0.0))
    throw DomainError("exact constraint distance must be positive");
  if (c.kind == ConstraintKind::interval && !(c.l > 0.0 && c.l <= c.u))
    throw DomainError("interval constraint requires 0 < l <= u");
  constraints_.push_back(c);
}

void MdgpProblem::fix_atom(std::size_t atom, const Vec3& coords) {
  if (atom >= atoms_) throw DomainError("fixed atom index out of range");
  for (double v : coords)
    if (!std::isfinite(v)) throw DomainError("anchor coordinates must be finite");
  fixed_[atom] = true;
  anchor_[atom] = coords;
  rebuild_free();
}

void MdgpProblem::set_uniform_perturbation(double eps) {
  if (!(eps >= 0.0)) throw DomainError("perturbation must be nonnegative");
  std::fill(eps_.begin(), eps_.end(), eps);
}

void MdgpProblem::set_perturbation(std::vector<double> eps) {
  if (eps.size() != 3 * atoms_) throw DimensionError("perturbation must have 3N entries");
  for (double e : eps)
    if (!(e >= 0.0)) throw DomainError("perturbation must be nonnegative");
  eps_ = std::move(eps);
}

void MdgpProblem::rebuild_free() {
  free_.clear();
  slot_.assign(atoms_, npos);
  for (std::size_t a = 0; a < atoms_; ++a) {
    if (!fixed_[a]) {
      slot_[a] = free_.size();
      free_.push_back(a);
    }
  }
}

std::vector<double> MdgpProblem::expand(std::span<const double> free_coords) const {
  if (free_coords.size() != free_dimension())
    throw DimensionError("free coordinate vector has wrong length");
  std::vector<double> full(3 * atoms_);
  for (std::size_t a = 0; a < atoms_; ++a)
    for (int c = 0; c < 3; ++c)
      full[3 * a + c] = fixed_[a] ? anchor_[a][c] : free_coords[3 * slot_[a] + c];
  return full;
}

namespace {

struct TermDerivs {
  double value;
  double d1;  // dF/dtau
  double d2;  // d2F/dtau2
};

TermDerivs constraint_term(const DistanceConstraint& c, double tau) {
  if (c.kind == ConstraintKind::exact) {
    const double res = tau - c.d * c.d;
    return {c.w * res * res, 2.0 * c.w * res, 2.0 * c.w};
  }
  const double lo = std::max(c.l * c.l - tau, 0.0);
  const double hi = std::max(tau - c.u * c.u, 0.0);
  // At a kink (lo == 0 or hi == 0 exactly) the contribution is zero.
  const double d2 = (lo > 0.0 || hi > 0.0) ? 2.0 * c.w : 0.0;
  return {c.w * (lo * lo + hi * hi), c.w * (2.0 * hi - 2.0 * lo), d2};
}

}  // namespace

double mdgp_penalty(std::span<const double> x_free, const MdgpProblem& prob,
                    std::span<double> grad) {
  const std::vector<double> full = prob.expand(x_free);
  const auto& free = prob.free_atoms();
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != x_free.size())
    throw DimensionError("penalty gradient buffer has wrong length");

  // Accumulate the gradient over all 3N coordinates, then gather free blocks.
  std::vector<double> gfull(want_grad ? full.size() : 0, 0.0);
  double f = 0.0;
  for (const auto& c : prob.constraints()) {
    double r[3];
    double tau = 0.0;
    for (int k = 0; k < 3; ++k) {
      r[k] = full[3 * c.i + k] - full[3 * c.j + k];
      tau += r[k] * r[k];
    }
    const TermDerivs t = constraint_term(c, tau);
    f += t.value;
    if (want_grad && t.d1 != 0.0) {
      for (int k = 0; k < 3; ++k) {
        gfull[3 * c.i + k] += 2.0 * t.d1 * r[k];
        gfull[3 * c.j + k] -= 2.0 * t.d1 * r[k];
      }
    }
  }
  const auto& eps = prob.perturbation();
  for (std::size_t b = 0; b < free.size(); ++b) {
    for (int k = 0; k < 3; ++k) {
      const std::size_t full_idx = 3 * free[b] + k;
      f -= eps[full_idx] * x_free[3 * b + k];
      if (want_grad) grad[3 * b + k] = gfull[full_idx] - eps[full_idx];
    }
  }
  return f;
}

SymmetricMatrix mdgp_hessian(std::span<const double> x_free, const MdgpProblem& prob) {
  const std::vector<double> full = prob.expand(x_free);
  const auto& free = prob.free_atoms();
  std::vector<std::size_t> slot(prob.atom_count(), npos);
  for (std::size_t b = 0; b < free.size(); ++b) slot[free[b]] = b;

  SymmetricMatrix h(x_free.size());
  for (const auto& c : prob.constraints()) {
    double r[3];
    double tau = 0.0;
    for (int k = 0; k < 3; ++k) {
      r[k] = full[3 * c.i + k] - full[3 * c.j + k];
      tau += r[k] * r[k];
    }
    const TermDerivs t = constraint_term(c, tau);
    // Block (a,b) of d2F: sign_a sign_b (4 F'' r r^T + 2 F' I)
    const std::size_t atoms[2] = {c.i, c.j};
    const double sign[2] = {1.0, -1.0};
    for (int a = 0; a < 2; ++a) {
      if (slot[atoms[a]] == npos) continue;
      for (int b = a; b < 2; ++b) {
        if (slot[atoms[b]] == npos) continue;
        const double s = sign[a] * sign[b];
        const std::size_t ra = 3 * slot[atoms[a]];
        const std::size_t rb = 3 * slot[atoms[b]];
        for (int p = 0; p < 3; ++p) {
          for (int q = 0; q < 3; ++q) {
            if (a == b && q < p) continue;  // diagonal block: upper triangle only
            double v = s * 4.0 * t.d2 * r[p] * r[q];
            if (p == q) v += s * 2.0 * t.d1;
            h.add(ra + p, rb + q, v);
          }
        }
      }
    }
  }
  return h;
}

ObjectiveProblem make_mdgp_objective(MdgpProblem prob) {
  if (prob.free_dimension() == 0) throw DomainError("distance-geometry problem has no free atoms");
  const std::size_t n = prob.free_dimension();
  auto shared = std::make_shared<const MdgpProblem>(std::move(prob));
  return ObjectiveProblem(
      n,
      [shared](std::span<const double> x, std::span<double> g) {
        return mdgp_penalty(x, *shared, g);
      },
      [shared](std::span<const double> x) { return mdgp_hessian(x, *shared); });
}

ContactPattern zipper_contacts() { return {{0, 0}, {1, 0}, {1, 1}}; }

namespace {

void check_contacts(std::size_t anchors, std::size_t variables, const ContactPattern& contacts) {
  if (variables == 0) throw DomainError("anchored objective needs at least one variable atom");
  for (const auto& [v, a] : contacts) {
    if (v >= variables || a >= anchors) throw DomainError("contact index out of range");
  }
}

}  // namespace

ObjectiveProblem make_zipper_lj(std::span<const Vec3> anchors, std::size_t variables,
                                const ContactPattern& contacts) {
  check_contacts(anchors.size(), variables, contacts);
  std::vector<Vec3> fixed(anchors.begin(), anchors.end());
  return ObjectiveProblem(
      3 * variables, [fixed, contacts](std::span<const double> x, std::span<double> g) {
        if (!g.empty()) std::fill(g.begin(), g.end(), 0.0);
        double f = 0.0;
        for (const auto& [v, a] : contacts) {
          double r[3];
          double tau = 0.0;
          for (int c = 0; c < 3; ++c) {
            r[c] = x[3 * v + c] - fixed[a][c];
            tau += r[c] * r[c];
          }
          // Anchors are numbered after the variables in error reports.
          if (tau == 0.0) throw SingularityError(v, a);
          const double inv3 = 1.0 / (tau * tau * tau);
          const double inv6 = inv3 * inv3;
          f += 4.0 * (inv6 - inv3);
          if (!g.empty()) {
            const double dtau = 4.0 * (-6.0 * inv6 + 3.0 * inv3) / tau;
            for (int c = 0; c < 3; ++c) g[3 * v + c] += 2.0 * dtau * r[c];
          }
        }
        return f;
      });
}

MdgpProblem make_zipper_penalty(std::span<const Vec3> anchors, std::size_t variables,
                                double target, double eps, const ContactPattern& contacts) {
  if (!(target > 0.0)) throw DomainError("target distance must be positive");
  check_contacts(anchors.size(), variables, contacts);
  MdgpProblem prob(anchors.size() + variables);
  for (std::size_t a = 0; a < anchors.size(); ++a) prob.fix_atom(a, anchors[a]);
  for (const auto& [v, a] : contacts)
    prob.add_constraint(DistanceConstraint::exact(anchors.size() + v, a, target, 0.5));
  prob.set_uniform_perturbation(eps);
  return prob;
}

namespace {

template <typename T>
T read_field(std::istringstream& ls, std::size_t line, const char* what) {
  T v{};
  if (!(ls >> v)) throw ParseError(line, std::string("expected ") + what);
  return v;
}

}  // namespace

MdgpProblem read_mdgp(std::istream& in) {
  MdgpProblem prob;
  bool have_header = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string key;
    if (!(ls >> key)) continue;

    try {
      if (key == "atoms") {
        if (have_header) throw ParseError(line_no, "duplicate atoms header");
        const long n = read_field<long>(ls, line_no, "atom count");
        if (n <= 0) throw ParseError(line_no, "atom count must be positive");
        prob = MdgpProblem(static_cast<std::size_t>(n));
        have_header = true;
      } else if (!have_header) {
        throw ParseError(line_no, "'atoms N' header must precede '" + key + "'");
      } else if (key == "exact") {
        const auto i = read_field<std::size_t>(ls, line_no, "atom index i");
        const auto j = read_field<std::size_t>(ls, line_no, "atom index j");
        const auto d = read_field<double>(ls, line_no, "distance d");
        const auto w = read_field<double>(ls, line_no, "weight w");
        prob.add_constraint(DistanceConstraint::exact(i, j, d, w));
      } else if (key == "range") {
        const auto i = read_field<std::size_t>(ls, line_no, "atom index i");
        const auto j = read_field<std::size_t>(ls, line_no, "atom index j");
        const auto l = read_field<double>(ls, line_no, "lower bound l");
        const auto u = read_field<double>(ls, line_no, "upper bound u");
        const auto w = read_field<double>(ls, line_no, "weight w");
        prob.add_constraint(DistanceConstraint::interval(i, j, l, u, w));
      } else if (key == "fix") {
        const auto i = read_field<std::size_t>(ls, line_no, "atom index");
        Vec3 p{};
        for (double& c : p) c = read_field<double>(ls, line_no, "coordinate");
        prob.fix_atom(i, p);
      } else {
        throw ParseError(line_no, "unknown record '" + key + "'");
      }
      std::string extra;
      if (ls >> extra) throw ParseError(line_no, "unexpected trailing field '" + extra + "'");
    } catch (const DomainError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(line_no, "missing 'atoms N' header");
  return prob;
}

MdgpProblem read_mdgp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_mdgp(in);
}

}  // namespace qn
