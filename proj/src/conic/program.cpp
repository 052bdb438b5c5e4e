#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "regret/conic.hpp"

namespace regret::conic {
namespace {

Eigen::VectorXd dense_atom(const SparseVector& atom, int size) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  for (std::size_t k = 0; k < atom.size(); ++k) v(atom.index[k]) += atom.value[k];
  return v;
}

void add_term_to(Eigen::MatrixXd& m, const PsdBlock& block, const PsdTerm& t, double scale) {
  const Eigen::VectorXd a = dense_atom(block.atoms[t.atom_p], block.size);
  const Eigen::VectorXd b = dense_atom(block.atoms[t.atom_q], block.size);
  m.noalias() += (0.5 * scale * t.coef) * (a * b.transpose() + b * a.transpose());
}

}  // namespace

Eigen::MatrixXd PsdBlock::coefficient(int var) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  for (const auto& t : terms)
    if (t.var == var) add_term_to(m, *this, t, 1.0);
  return m;
}

Eigen::MatrixXd PsdBlock::evaluate(const Eigen::VectorXd& x) const {
  // Accumulate in atom coordinates first: M(p,q) then expand once.
  const int na = static_cast<int>(atoms.size());
  Eigen::MatrixXd small = Eigen::MatrixXd::Zero(na, na);
  for (const auto& t : terms) {
    const double v = 0.5 * t.coef * x(t.var);
    small(t.atom_p, t.atom_q) += v;
    small(t.atom_q, t.atom_p) += v;
  }
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(size, na);
  for (int a = 0; a < na; ++a) basis.col(a) = dense_atom(atoms[a], size);
  Eigen::MatrixXd result = constant;
  result.noalias() += basis * small * basis.transpose();
  return result;
}

double AffineRow::evaluate(const Eigen::VectorXd& x) const {
  double v = constant;
  for (std::size_t k = 0; k < coeffs.size(); ++k) v += coeffs.value[k] * x(coeffs.index[k]);
  return v;
}

int ConicProgram::add_variable(double cost) {
  objective.conservativeResize(num_vars + 1);
  objective(num_vars) = cost;
  return num_vars++;
}

int ConicProgram::add_equality(const SparseVector& coeffs, double rhs) {
  const int row = num_equalities++;
  for (std::size_t k = 0; k < coeffs.size(); ++k) equalities.push_back({row, coeffs.index[k], coeffs.value[k]});
  equality_rhs.conservativeResize(num_equalities);
  equality_rhs(row) = rhs;
  return row;
}

void ConicProgram::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("conic program: " + what); };
  if (num_vars < 0) fail("negative variable count");
  if (objective.size() != num_vars) fail("objective length differs from num_vars");
  if (equality_rhs.size() != num_equalities) fail("equality_rhs length differs from num_equalities");
  for (const auto& e : equalities) {
    if (e.row < 0 || e.row >= num_equalities) fail("equality row index out of range");
    if (e.var < 0 || e.var >= num_vars) fail("equality variable index out of range");
  }
  for (std::size_t b = 0; b < psd_blocks.size(); ++b) {
    const auto& blk = psd_blocks[b];
    const std::string tag = "psd block " + std::to_string(b) + ": ";
    if (blk.size <= 0) fail(tag + "non-positive size");
    if (blk.constant.rows() != blk.size || blk.constant.cols() != blk.size) fail(tag + "constant has wrong shape");
    const double asym = (blk.constant - blk.constant.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, blk.constant.cwiseAbs().maxCoeff())) fail(tag + "constant is not symmetric");
    for (const auto& a : blk.atoms)
      for (int i : a.index)
        if (i < 0 || i >= blk.size) fail(tag + "atom entry out of range");
    const int na = static_cast<int>(blk.atoms.size());
    for (const auto& t : blk.terms) {
      if (t.var < 0 || t.var >= num_vars) fail(tag + "term variable out of range");
      if (t.atom_p < 0 || t.atom_p >= na || t.atom_q < 0 || t.atom_q >= na) fail(tag + "term atom out of range");
    }
  }
  for (std::size_t c = 0; c < soc_constraints.size(); ++c) {
    const auto& soc = soc_constraints[c];
    if (soc.rows.empty()) fail("soc " + std::to_string(c) + ": no rows");
    for (const auto& r : soc.rows)
      for (int i : r.coeffs.index)
        if (i < 0 || i >= num_vars) fail("soc " + std::to_string(c) + ": variable out of range");
  }
  for (int v : nonneg_vars)
    if (v < 0 || v >= num_vars) fail("nonneg variable out of range");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalTrouble: return "numerical_trouble";
  }
  return "unknown";
}

Violations check_solution(const ConicProgram& program, const Eigen::VectorXd& primal) {
  if (primal.size() != program.num_vars) throw std::invalid_argument("check_solution: primal has wrong length");
  Violations v;
  Eigen::VectorXd eq = -program.equality_rhs;
  for (const auto& e : program.equalities) eq(e.row) += e.coef * primal(e.var);
  v.max_eq_violation = eq.size() ? eq.cwiseAbs().maxCoeff() : 0.0;

  for (const auto& blk : program.psd_blocks) {
    Eigen::MatrixXd s = blk.evaluate(primal);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues()(0);
    v.psd_min_eigenvalues.push_back(mn);
    v.max_psd_violation = std::max(v.max_psd_violation, -mn);
  }
  for (const auto& soc : program.soc_constraints) {
    const double head = soc.rows[0].evaluate(primal);
    double tail = 0.0;
    for (std::size_t k = 1; k < soc.rows.size(); ++k) {
      const double r = soc.rows[k].evaluate(primal);
      tail += r * r;
    }
    const double slack = head - std::sqrt(tail);
    v.soc_slacks.push_back(slack);
    v.max_soc_violation = std::max(v.max_soc_violation, -slack);
  }
  for (int j : program.nonneg_vars) v.max_nonneg_violation = std::max(v.max_nonneg_violation, -primal(j));
  return v;
}

// ---------------------------------------------------------------------------
// Text format
//
//   conic-program 1
//   vars <m> equalities <p>
//   objective <m values>
//   eq-triplets <k>            followed by k lines: row var coef
//   eq-rhs <p values>
//   psd-blocks <B>
//     block <size> atoms <na> terms <nt> constant-entries <nc>
//     nc lines: i j value   (upper triangle, i <= j)
//     na lines: atom <nnz> (index value)*
//     nt lines: var p q coef
//   soc <C>
//     cone <rows>   then per row: <constant> <nnz> (var coef)*
//   nonneg <k> <indices>
// ---------------------------------------------------------------------------

namespace {

void put(std::ostream& out, double v) { out << std::setprecision(17) << v; }

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw std::runtime_error("read_program: expected '" + word + "', got '" + got + "'");
}

template <class T>
T take(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw std::runtime_error(std::string("read_program: failed to read ") + what);
  return v;
}

}  // namespace

void write_program(std::ostream& out, const ConicProgram& p) {
  out << "conic-program 1\n";
  out << "vars " << p.num_vars << " equalities " << p.num_equalities << "\n";
  out << "objective";
  for (int i = 0; i < p.num_vars; ++i) {
    out << ' ';
    put(out, p.objective(i));
  }
  out << "\neq-triplets " << p.equalities.size() << "\n";
  for (const auto& e : p.equalities) {
    out << e.row << ' ' << e.var << ' ';
    put(out, e.coef);
    out << '\n';
  }
  out << "eq-rhs";
  for (int i = 0; i < p.num_equalities; ++i) {
    out << ' ';
    put(out, p.equality_rhs(i));
  }
  out << "\npsd-blocks " << p.psd_blocks.size() << "\n";
  for (const auto& b : p.psd_blocks) {
    std::vector<std::tuple<int, int, double>> entries;
    for (int j = 0; j < b.size; ++j)
      for (int i = 0; i <= j; ++i)
        if (b.constant(i, j) != 0.0) entries.emplace_back(i, j, b.constant(i, j));
    out << "block " << b.size << " atoms " << b.atoms.size() << " terms " << b.terms.size() << " constant-entries "
        << entries.size() << "\n";
    for (const auto& [i, j, v] : entries) {
      out << i << ' ' << j << ' ';
      put(out, v);
      out << '\n';
    }
    for (const auto& a : b.atoms) {
      out << "atom " << a.size();
      for (std::size_t k = 0; k < a.size(); ++k) {
        out << ' ' << a.index[k] << ' ';
        put(out, a.value[k]);
      }
      out << '\n';
    }
    for (const auto& t : b.terms) {
      out << t.var << ' ' << t.atom_p << ' ' << t.atom_q << ' ';
      put(out, t.coef);
      out << '\n';
    }
  }
  out << "soc " << p.soc_constraints.size() << "\n";
  for (const auto& c : p.soc_constraints) {
    out << "cone " << c.rows.size() << "\n";
    for (const auto& r : c.rows) {
      put(out, r.constant);
      out << ' ' << r.coeffs.size();
      for (std::size_t k = 0; k < r.coeffs.size(); ++k) {
        out << ' ' << r.coeffs.index[k] << ' ';
        put(out, r.coeffs.value[k]);
      }
      out << '\n';
    }
  }
  out << "nonneg " << p.nonneg_vars.size();
  for (int v : p.nonneg_vars) out << ' ' << v;
  out << '\n';
}

ConicProgram read_program(std::istream& in) {
  ConicProgram p;
  expect(in, "conic-program");
  if (take<int>(in, "version") != 1) throw std::runtime_error("read_program: unsupported version");
  expect(in, "vars");
  p.num_vars = take<int>(in, "vars");
  expect(in, "equalities");
  p.num_equalities = take<int>(in, "equalities");
  expect(in, "objective");
  p.objective.resize(p.num_vars);
  for (int i = 0; i < p.num_vars; ++i) p.objective(i) = take<double>(in, "objective");
  expect(in, "eq-triplets");
  const auto ntrip = take<std::size_t>(in, "eq-triplets");
  for (std::size_t k = 0; k < ntrip; ++k) {
    EqualityTriplet e;
    e.row = take<int>(in, "row");
    e.var = take<int>(in, "var");
    e.coef = take<double>(in, "coef");
    p.equalities.push_back(e);
  }
  expect(in, "eq-rhs");
  p.equality_rhs.resize(p.num_equalities);
  for (int i = 0; i < p.num_equalities; ++i) p.equality_rhs(i) = take<double>(in, "rhs");
  expect(in, "psd-blocks");
  const auto nblocks = take<std::size_t>(in, "psd-blocks");
  for (std::size_t bi = 0; bi < nblocks; ++bi) {
    PsdBlock b;
    expect(in, "block");
    b.size = take<int>(in, "size");
    expect(in, "atoms");
    const auto na = take<std::size_t>(in, "atoms");
    expect(in, "terms");
    const auto nt = take<std::size_t>(in, "terms");
    expect(in, "constant-entries");
    const auto nc = take<std::size_t>(in, "constant-entries");
    b.constant = Eigen::MatrixXd::Zero(b.size, b.size);
    for (std::size_t k = 0; k < nc; ++k) {
      const int i = take<int>(in, "i");
      const int j = take<int>(in, "j");
      const double v = take<double>(in, "value");
      b.constant(i, j) = v;
      b.constant(j, i) = v;
    }
    for (std::size_t k = 0; k < na; ++k) {
      expect(in, "atom");
      const auto nnz = take<std::size_t>(in, "nnz");
      SparseVector a;
      for (std::size_t e = 0; e < nnz; ++e) {
        const int i = take<int>(in, "index");
        a.push(i, take<double>(in, "value"));
      }
      b.atoms.push_back(std::move(a));
    }
    for (std::size_t k = 0; k < nt; ++k) {
      PsdTerm t;
      t.var = take<int>(in, "var");
      t.atom_p = take<int>(in, "p");
      t.atom_q = take<int>(in, "q");
      t.coef = take<double>(in, "coef");
      b.terms.push_back(t);
    }
    p.psd_blocks.push_back(std::move(b));
  }
  expect(in, "soc");
  const auto nsoc = take<std::size_t>(in, "soc");
  for (std::size_t c = 0; c < nsoc; ++c) {
    expect(in, "cone");
    const auto nrows = take<std::size_t>(in, "rows");
    SocConstraint soc;
    for (std::size_t r = 0; r < nrows; ++r) {
      AffineRow row;
      row.constant = take<double>(in, "constant");
      const auto nnz = take<std::size_t>(in, "nnz");
      for (std::size_t e = 0; e < nnz; ++e) {
        const int i = take<int>(in, "var");
        row.coeffs.push(i, take<double>(in, "coef"));
      }
      soc.rows.push_back(std::move(row));
    }
    p.soc_constraints.push_back(std::move(soc));
  }
  expect(in, "nonneg");
  const auto nn = take<std::size_t>(in, "nonneg");
  for (std::size_t k = 0; k < nn; ++k) p.nonneg_vars.push_back(take<int>(in, "nonneg index"));
  p.validate();
  return p;
}

}  // namespace regret::conic
