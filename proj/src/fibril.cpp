#include "qn/fibril.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace qn {

Atom parse_atom_label(const std::string& label, const Vec3& coords) {
  // CHAIN.RESnnn.NAME
  const auto dot1 = label.find('.');
  const auto dot2 = label.find('.', dot1 == std::string::npos ? 0 : dot1 + 1);
  if (dot1 != 1 || dot2 == std::string::npos) throw DomainError("bad atom label '" + label + "'");
  const std::string res = label.substr(dot1 + 1, dot2 - dot1 - 1);
  std::size_t digits = res.find_first_of("0123456789");
  if (digits == std::string::npos || digits == 0) throw DomainError("bad residue in '" + label + "'");
  Atom a;
  a.chain = label[0];
  a.residue = res.substr(0, digits);
  a.residue_seq = std::stoi(res.substr(digits));
  a.name = label.substr(dot2 + 1);
  a.element = a.name.substr(0, 1);
  a.coords = coords;
  return a;
}

std::string atom_label(const Atom& a) {
  return std::string(1, a.chain) + "." + a.residue + std::to_string(a.residue_seq) + "." + a.name;
}

ZipperInstance zipper_instance(ZipperId id) {
  ZipperInstance z;
  z.id = id;
  if (id == ZipperId::one) {
    z.anchors = {{"A.ALA3.CB", {1.071, 2.986, 1.888}}, {"A.ALA1.CB", {1.135, -0.763, 7.209}}};
    z.variable_labels = {"E.ALA6.CB", "E.ALA4.CB"};
    z.x0 = Point{-0.067, 5.274, 7.860, -1.119, 1.311, 13.564};
    z.reported_solution = Point{3.027, 4.954, 3.856, 1.679, 1.777, 5.011};
  } else {
    z.anchors = {{"B.ALA4.CB", {5.446, 2.796, 2.662}}, {"B.ALA6.CB", {5.201, -1.125, 7.873}}};
    z.variable_labels = {"F.ALA1.CB", "F.ALA3.CB"};
    z.x0 = Point{4.714, 4.878, 8.881, 4.170, 1.360, 14.292};
    z.reported_solution = Point{7.412, 4.760, 4.624, 5.887, 1.451, 5.757};
  }
  return z;
}

ZipperBundle build_zipper(ZipperId id) {
  ZipperInstance z = zipper_instance(id);
  std::vector<Vec3> anchors;
  for (const auto& a : z.anchors) anchors.push_back(a.coords);
  ObjectiveProblem lj = make_zipper_lj(anchors, z.variable_labels.size());
  MdgpProblem pen = make_zipper_penalty(anchors, z.variable_labels.size(), z.target, z.eps);
  ObjectiveProblem pen_obj = make_mdgp_objective(pen);
  return ZipperBundle{std::move(z), std::move(lj), std::move(pen), std::move(pen_obj)};
}

std::array<double, 3> contact_distances(const ZipperInstance& z, std::span<const double> x) {
  if (x.size() != 3 * z.variable_labels.size())
    throw DimensionError("zipper coordinates must cover both variable atoms");
  std::array<double, 3> out{};
  const ContactPattern contacts = zipper_contacts();
  for (std::size_t c = 0; c < contacts.size(); ++c) {
    const auto [v, a] = contacts[c];
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double diff = x[3 * v + k] - z.anchors[a].coords[k];
      s += diff * diff;
    }
    out[c] = std::sqrt(s);
  }
  return out;
}

bool within_band(std::span<const double> distances, double target, double fraction) {
  const double lo = (1.0 - fraction) * target;
  const double hi = (1.0 + fraction) * target;
  for (double d : distances)
    if (!(d >= lo && d <= hi)) return false;
  return true;
}

ZipperSolveError::ZipperSolveError(ZipperId zid, SolverTrace t)
    : Error("zipper " + std::to_string(static_cast<int>(zid)) + " did not converge (" +
            to_string(t.reason) + ")"),
      id(zid),
      trace(std::move(t)) {}

SolverConfig zipper_solver_config() {
  SolverConfig cfg;
  cfg.m1 = 5;
  cfg.grad_tol = 1e-6;
  cfg.grad_tol_relative = false;
  cfg.max_iters = 500;
  cfg.line_search.sigma1 = 1e-4;
  cfg.line_search.sigma2 = 0.9;
  return cfg;
}

ZipperSolution solve_zipper(ZipperId id, const SolverConfig& cfg, bool use_sa,
                            const AnnealConfig& acfg) {
  const ZipperBundle b = build_zipper(id);
  Point start = b.instance.x0;
  if (use_sa) start = anneal(b.penalty, start, acfg, cfg).x_best;

  SolveResult r = solve(b.penalty, start, cfg);
  if (!r.converged()) throw ZipperSolveError(id, std::move(r.trace));

  ZipperSolution s;
  s.id = id;
  s.distances = contact_distances(b.instance, r.x);
  s.feasible = within_band(s.distances, b.instance.target);
  s.gnorm = r.trace.final_gnorm;
  s.x = std::move(r.x);
  s.trace = std::move(r.trace);
  return s;
}

std::vector<ZipperSolution> solve_zippers(const SolverConfig& cfg, bool use_sa,
                                          const AnnealConfig& acfg) {
  return {solve_zipper(ZipperId::one, cfg, use_sa, acfg),
          solve_zipper(ZipperId::two, cfg, use_sa, acfg)};
}

Chain derive_chain(const Chain& src, const Vec3& offset, char chain_id) {
  Chain out = src;
  for (Atom& a : out) {
    for (int k = 0; k < 3; ++k) a.coords[k] += offset[k];
    a.chain = chain_id;
  }
  return out;
}

ChainSet skeleton_template() {
  ChainSet t;
  // Residue order within each chain.
  for (ZipperId id : {ZipperId::one, ZipperId::two}) {
    for (const auto& anchor : zipper_instance(id).anchors) {
      Atom a = parse_atom_label(anchor.label, anchor.coords);
      t[a.chain].push_back(a);
    }
  }
  for (auto& [id, chain] : t) {
    std::sort(chain.begin(), chain.end(),
              [](const Atom& x, const Atom& y) { return x.residue_seq < y.residue_seq; });
  }
  return t;
}

ChainSet template_from_pdb(std::span<const Atom> atoms) {
  ChainSet t;
  for (const Atom& a : atoms)
    if (a.chain == 'A' || a.chain == 'B') t[a.chain].push_back(a);
  if (t.count('A') == 0 || t.count('B') == 0)
    throw ContractViolation("template must provide chains A and B");
  return t;
}

namespace {

const ZipperSolution* find_solution(std::span<const ZipperSolution> zippers, ZipperId id) {
  for (const auto& z : zippers)
    if (z.id == id) return &z;
  return nullptr;
}

std::string format_vec(const Vec3& v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.4f, %.4f, %.4f)", v[0], v[1], v[2]);
  return buf;
}

Vec3 minus(const Vec3& v) { return {-v[0], -v[1], -v[2]}; }

}  // namespace

Vec3 mean_zipper_displacement(std::span<const ZipperSolution> zippers) {
  Vec3 sum{};
  std::size_t count = 0;
  for (const auto& sol : zippers) {
    const ZipperInstance z = zipper_instance(sol.id);
    for (std::size_t v = 0; v < z.variable_labels.size(); ++v) {
      for (int k = 0; k < 3; ++k) sum[k] += sol.x[3 * v + k] - z.anchors[v].coords[k];
      ++count;
    }
  }
  if (count == 0) throw ContractViolation("no zipper solutions to average");
  for (double& s : sum) s /= static_cast<double>(count);
  return sum;
}

FibrilModel assemble_model(const ChainSet& tmpl, std::span<const ZipperSolution> zippers,
                           const AssemblyOffsets& offsets) {
  for (ZipperId id : {ZipperId::one, ZipperId::two}) {
    const ZipperSolution* s = find_solution(zippers, id);
    if (s == nullptr) {
      throw ContractViolation("zipper " + std::to_string(static_cast<int>(id)) +
                              " must be solved before assembly");
    }
  }
  if (tmpl.count('A') == 0 || tmpl.count('B') == 0)
    throw ContractViolation("template must provide chains A and B");

  FibrilModel m;
  const Chain& a = tmpl.at('A');
  const Chain& b = tmpl.at('B');
  auto put = [&](char id, Chain c, std::string how) {
    m.chains[id] = std::move(c);
    m.provenance[id] = std::move(how);
  };
  put('A', derive_chain(a, {0, 0, 0}, 'A'), "template");
  put('B', derive_chain(b, {0, 0, 0}, 'B'), "template");
  put('E', derive_chain(a, offsets.ef, 'E'), "A + " + format_vec(offsets.ef));
  put('F', derive_chain(b, offsets.ef, 'F'), "B + " + format_vec(offsets.ef));
  put('C', derive_chain(a, offsets.cd, 'C'), "A + " + format_vec(offsets.cd));
  put('D', derive_chain(b, offsets.cd, 'D'), "B + " + format_vec(offsets.cd));
  put('G', derive_chain(m.chains.at('E'), offsets.cd, 'G'), "E + " + format_vec(offsets.cd));
  put('H', derive_chain(m.chains.at('F'), offsets.cd, 'H'), "F + " + format_vec(offsets.cd));
  put('I', derive_chain(a, offsets.ij, 'I'), "A - " + format_vec(minus(offsets.ij)));
  put('J', derive_chain(m.chains.at('E'), offsets.ij, 'J'), "E - " + format_vec(minus(offsets.ij)));

  for (ZipperId id : {ZipperId::one, ZipperId::two}) {
    const ZipperSolution& s = *find_solution(zippers, id);
    const ZipperInstance z = zipper_instance(id);
    for (std::size_t v = 0; v < z.variable_labels.size(); ++v) {
      const Vec3 p{s.x[3 * v], s.x[3 * v + 1], s.x[3 * v + 2]};
      m.remarks.push_back("zipper " + std::to_string(static_cast<int>(id)) + " solved " +
                          z.variable_labels[v] + " " + format_vec(p));
    }
  }
  m.remarks.push_back("mean solved-minus-anchor displacement " +
                      format_vec(mean_zipper_displacement(zippers)));
  m.remarks.push_back("template-level E(F) offset " + format_vec(offsets.template_ef));
  for (const auto& [id, how] : m.provenance)
    m.remarks.push_back(std::string("chain ") + id + " = " + how);
  return m;
}

namespace {

std::string pdb_atom_name(const Atom& a) {
  // Names shorter than four characters start in column 14.
  if (a.name.size() >= 4) return a.name.substr(0, 4);
  std::string s = " " + a.name;
  s.resize(4, ' ');
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_pdb(std::ostream& out, const FibrilModel& model) {
  char line[128];
  for (const auto& r : model.remarks) {
    std::snprintf(line, sizeof line, "REMARK 250 %.68s\n", r.c_str());
    out << line;
  }
  int serial = 1;
  for (const auto& [id, chain] : model.chains) {
    const Atom* last = nullptr;
    for (const Atom& a : chain) {
      std::snprintf(line, sizeof line,
                    "ATOM  %5d %-4s %3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s\n",
                    serial++ % 100000, pdb_atom_name(a).c_str(), a.residue.c_str(), id,
                    a.residue_seq, a.coords[0], a.coords[1], a.coords[2], 1.0, 0.0,
                    a.element.c_str());
      out << line;
      last = &a;
    }
    if (last != nullptr) {
      std::snprintf(line, sizeof line, "TER   %5d      %3s %c%4d\n", serial++ % 100000,
                    last->residue.c_str(), id, last->residue_seq);
    } else {
      std::snprintf(line, sizeof line, "TER   %5d           %c\n", serial++ % 100000, id);
    }
    out << line;
  }
  out << "END\n";
}

void write_xyz(std::ostream& out, const FibrilModel& model) {
  std::size_t count = 0;
  for (const auto& [id, chain] : model.chains) count += chain.size();
  out << count << '\n' << "fibril model, " << model.chains.size() << " chains\n";
  char line[128];
  for (const auto& [id, chain] : model.chains) {
    for (const Atom& a : chain) {
      std::snprintf(line, sizeof line, "%-2s %12.6f %12.6f %12.6f\n", a.element.c_str(),
                    a.coords[0], a.coords[1], a.coords[2]);
      out << line;
    }
  }
}

void write_structure(const FibrilModel& model, StructureFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  if (format == StructureFormat::pdb)
    write_pdb(out, model);
  else
    write_xyz(out, model);
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

std::vector<Atom> read_pdb(std::istream& in) {
  std::vector<Atom> atoms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("ATOM  ", 0) != 0) continue;
    if (line.size() < 54) throw ParseError(line_no, "ATOM record shorter than 54 columns");
    Atom a;
    try {
      a.name = trim(line.substr(12, 4));
      a.residue = trim(line.substr(17, 3));
      a.chain = line[21];
      a.residue_seq = std::stoi(line.substr(22, 4));
      for (int k = 0; k < 3; ++k) a.coords[k] = std::stod(line.substr(30 + 8 * k, 8));
    } catch (const std::exception&) {
      throw ParseError(line_no, "malformed ATOM record");
    }
    a.element = line.size() >= 78 ? trim(line.substr(76, 2)) : std::string();
    if (a.element.empty() && !a.name.empty()) a.element = a.name.substr(0, 1);
    atoms.push_back(std::move(a));
  }
  return atoms;
}

std::vector<Atom> read_pdb_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_pdb(in);
}

}  // namespace qn
