#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qn/anneal.hpp"
#include "qn/objectives.hpp"
#include "qn/solver.hpp"

namespace qn {

struct Atom {
  std::string name;     // e.g. "CB"
  std::string residue;  // e.g. "ALA"
  int residue_seq = 0;
  char chain = 'A';
  Vec3 coords{};
  std::string element;  // e.g. "C"
};

using Chain = std::vector<Atom>;
using ChainSet = std::map<char, Chain>;

/// Multi-chain model. Chains are emitted in chain-id order.
struct FibrilModel {
  ChainSet chains;
  std::map<char, std::string> provenance;
  /// Free-form metadata written as REMARK records.
  std::vector<std::string> remarks;
};

/// Parses "A.ALA3.CB" into chain, residue, sequence number and atom name.
Atom parse_atom_label(const std::string& label, const Vec3& coords);
std::string atom_label(const Atom& a);

enum class ZipperId { one = 1, two = 2 };

struct NamedPosition {
  std::string label;
  Vec3 coords{};
};

struct ZipperInstance {
  ZipperId id = ZipperId::one;
  std::vector<NamedPosition> anchors;        // fixed CB atoms
  std::vector<std::string> variable_labels;  // moving CB atoms, in x order
  Point x0;
  Point reported_solution;  // the published optimum, used as a regression lock
  double target = 3.4;
  double eps = 0.05;
};

struct ZipperBundle {
  ZipperInstance instance;
  ObjectiveProblem lj;
  MdgpProblem penalty_problem;
  ObjectiveProblem penalty;
};

ZipperInstance zipper_instance(ZipperId id);
ZipperBundle build_zipper(ZipperId id);

/// The three anchor/variable contact distances at x, in contact-pattern order.
std::array<double, 3> contact_distances(const ZipperInstance& z, std::span<const double> x);
bool within_band(std::span<const double> distances, double target, double fraction = 0.05);

struct ZipperSolution {
  ZipperId id = ZipperId::one;
  Point x;
  std::array<double, 3> distances{};
  double gnorm = 0.0;
  bool feasible = false;
  SolverTrace trace;
};

/// Raised when the solver stops without meeting its gradient tolerance.
class ZipperSolveError : public Error {
 public:
  ZipperSolveError(ZipperId id, SolverTrace trace);
  ZipperId id;
  SolverTrace trace;
};

/// Minimizes the penalty form from the published starting point; with
/// `use_sa` the start is first improved by annealing.
ZipperSolution solve_zipper(ZipperId id, const SolverConfig& cfg, bool use_sa = false,
                            const AnnealConfig& acfg = {});
std::vector<ZipperSolution> solve_zippers(const SolverConfig& cfg, bool use_sa = false,
                                          const AnnealConfig& acfg = {});

/// Solver settings used for the zipper runs: absolute tolerance 1e-6, m1 = 5.
SolverConfig zipper_solver_config();

Chain derive_chain(const Chain& src, const Vec3& offset, char chain_id);

struct AssemblyOffsets {
  Vec3 ef{1.0335, 1.0823, 0.9723};   // E(F) = A(B) + ef
  Vec3 cd{9.666, 0.0, 0.0};          // C(D) = A(B) + cd, G(H) = E(F) + cd
  Vec3 ij{-9.666, 0.0, 0.0};         // I(J) = A(E) + ij
  Vec3 template_ef{-1.885, 0.0, 17.243};  // template-level E(F) offset, metadata only
};

/// Chains A and B built from the anchor CB positions.
ChainSet skeleton_template();
/// Chains A and B taken from a PDB template.
ChainSet template_from_pdb(std::span<const Atom> atoms);

/// Ten-chain model: A,B template; E,F; C,D; G,H; I,J.
FibrilModel assemble_model(const ChainSet& tmpl, std::span<const ZipperSolution> zippers,
                           const AssemblyOffsets& offsets = {});

/// Mean of the solved-minus-anchor displacements over the four zipper contacts.
Vec3 mean_zipper_displacement(std::span<const ZipperSolution> zippers);

enum class StructureFormat { pdb, xyz };

void write_pdb(std::ostream& out, const FibrilModel& model);
void write_xyz(std::ostream& out, const FibrilModel& model);
void write_structure(const FibrilModel& model, StructureFormat format, const std::string& path);

/// ATOM records only; TER/END and everything else is skipped.
std::vector<Atom> read_pdb(std::istream& in);
std::vector<Atom> read_pdb_file(const std::string& path);

}  // namespace qn
