#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qn/numeric.hpp"

namespace qn {

using Vec3 = std::array<double, 3>;

struct LJParams {
  double epsilon = 1.0;  // well depth
  double sigma = 1.0;    // atom diameter
  void validate() const;
};

/// Coefficients of the A/r^12 - B/r^6 and C/r^12 - D/r^10 pair forms.
struct AB1210Params {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
  void validate() const;
};

/// 4 eps ((sigma/r)^12 - (sigma/r)^6)
double lj_pair(double r, const LJParams& p = {});
/// A/r^12 - B/r^6
double ab_pair(double r, const AB1210Params& p);
/// Hydrogen-bond 12-10 form: C/r^12 - D/r^10
double hb_pair(double r, const AB1210Params& p);

/// Reduced-unit cluster energy 4 sum_{i>j} (tau^-6 - tau^-3), tau the squared
/// pair distance. Writes the gradient when `grad` is non-empty.
double lj_cluster(std::span<const double> x, std::size_t atoms, std::span<double> grad = {});
ObjectiveProblem make_lj_cluster(std::size_t atoms);

enum class ConstraintKind { exact, interval };

struct DistanceConstraint {
  std::size_t i = 0;
  std::size_t j = 0;
  ConstraintKind kind = ConstraintKind::exact;
  double d = 0.0;  // exact target
  double l = 0.0;  // interval bounds
  double u = 0.0;
  double w = 1.0;

  static DistanceConstraint exact(std::size_t i, std::size_t j, double d, double w = 1.0);
  static DistanceConstraint interval(std::size_t i, std::size_t j, double l, double u,
                                     double w = 1.0);
};

/// Weighted distance-geometry penalty with a linear perturbation and optional
/// anchor atoms whose coordinates are constants.
class MdgpProblem {
 public:
  MdgpProblem() = default;
  explicit MdgpProblem(std::size_t atoms);

  std::size_t atom_count() const { return atoms_; }
  const std::vector<DistanceConstraint>& constraints() const { return constraints_; }
  /// Per-coordinate perturbation over all 3N coordinates; only free atoms use it.
  const std::vector<double>& perturbation() const { return eps_; }
  bool is_fixed(std::size_t atom) const { return fixed_[atom]; }
  const Vec3& anchor(std::size_t atom) const { return anchor_[atom]; }
  /// Free atom indices in ascending order; coordinate block k of the free vector is atom free_atoms()[k].
  const std::vector<std::size_t>& free_atoms() const { return free_; }
  std::size_t free_dimension() const { return 3 * free_.size(); }

  void add_constraint(const DistanceConstraint& c);
  void fix_atom(std::size_t atom, const Vec3& coords);
  void set_uniform_perturbation(double eps);
  void set_perturbation(std::vector<double> eps);

  /// Full 3N coordinate vector with anchors substituted.
  std::vector<double> expand(std::span<const double> free_coords) const;

 private:
  void rebuild_free();

  std::size_t atoms_ = 0;
  std::vector<DistanceConstraint> constraints_;
  std::vector<double> eps_;
  std::vector<bool> fixed_;
  std::vector<Vec3> anchor_;
  std::vector<std::size_t> free_;
  std::vector<std::size_t> slot_;  // atom -> free block, or npos
};

/// Penalty value over the free coordinates; writes its gradient when `grad` is non-empty.
double mdgp_penalty(std::span<const double> x_free, const MdgpProblem& prob,
                    std::span<double> grad = {});
SymmetricMatrix mdgp_hessian(std::span<const double> x_free, const MdgpProblem& prob);
ObjectiveProblem make_mdgp_objective(MdgpProblem prob);

/// (variable atom, anchor atom) index pairs of an anchored contact pattern.
using ContactPattern = std::vector<std::pair<std::size_t, std::size_t>>;

/// Contacts of the steric-zipper instances: v0-a0, v1-a0, v1-a1.
ContactPattern zipper_contacts();

/// Reduced-unit LJ sum over the anchor/variable contacts, on raw coordinates.
ObjectiveProblem make_zipper_lj(std::span<const Vec3> anchors, std::size_t variables,
                                const ContactPattern& contacts = zipper_contacts());

/// Distance-geometry form of the same contacts: weight 1/2, target distance,
/// uniform perturbation eps. Atoms 0..anchors-1 are the fixed anchors and the
/// variables follow them.
MdgpProblem make_zipper_penalty(std::span<const Vec3> anchors, std::size_t variables,
                                double target = 3.4, double eps = 0.05,
                                const ContactPattern& contacts = zipper_contacts());

/// Reads the plain-text instance format (atoms / exact / range / fix records).
MdgpProblem read_mdgp(std::istream& in);
MdgpProblem read_mdgp_file(const std::string& path);

}  // namespace qn
