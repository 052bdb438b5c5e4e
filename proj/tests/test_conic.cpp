#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "conic/detail.hpp"
#include "regret/conic.hpp"

using namespace regret::conic;

namespace {

PsdBlock diagonal_block(int n) {
  PsdBlock b;
  b.size = n;
  b.constant = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) b.add_unit_atom(i);
  return b;
}

AffineRow row(double constant, std::initializer_list<std::pair<int, double>> coeffs) {
  AffineRow r;
  r.constant = constant;
  for (auto [v, c] : coeffs) r.coeffs.push(v, c);
  return r;
}

// Mixed program: x in a PSD block, two sparse epigraph variables in SOCs and a
// slack in an equality.
ConicProgram mixed_program() {
  ConicProgram p;
  const int x = p.add_variable(0.0);
  const int t1 = p.add_variable(1.0);
  const int t2 = p.add_variable(1.0);
  const int e = p.add_variable(0.0);
  PsdBlock b = diagonal_block(1);
  b.constant(0, 0) = 2.0;
  b.add_term(x, 0, 0, -1.0);
  p.psd_blocks.push_back(b);
  p.soc_constraints.push_back({{row(0, {{t1, 1}}), row(-3, {{x, 1}}), row(1, {})}});
  p.soc_constraints.push_back({{row(0, {{t2, 1}}), row(1, {{x, 1}}), row(1, {})}});
  p.nonneg_vars.push_back(e);
  SparseVector eq;
  eq.push(x, 1.0);
  eq.push(e, 1.0);
  p.add_equality(eq, 0.5);
  return p;
}

ConicProgram random_program(int n, int m, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  ConicProgram p;
  PsdBlock b;
  b.size = n;
  b.constant = Eigen::MatrixXd::Identity(n, n) * n;
  for (int a = 0; a < n + 2; ++a) {
    SparseVector atom;
    for (int i = 0; i < n; ++i)
      if (g(rng) > 0.3) atom.push(i, g(rng));
    if (atom.size() == 0) atom.push(a % n, 1.0);
    b.add_atom(atom);
  }
  for (int j = 0; j < m; ++j) {
    const int v = p.add_variable(g(rng));
    const int nt = 1 + j % 3;
    for (int t = 0; t < nt; ++t)
      b.add_term(v, static_cast<int>(rng() % (n + 2)), static_cast<int>(rng() % (n + 2)), g(rng));
  }
  p.psd_blocks.push_back(b);
  return p;
}

}  // namespace

TEST_SUITE("conic") {
  TEST_CASE("nonnegative variable") {
    ConicProgram p;
    const int x = p.add_variable(1.0);
    p.nonneg_vars.push_back(x);
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective_value == doctest::Approx(0.0).epsilon(1e-7));
  }

  TEST_CASE("two by two LMI") {
    // min g  s.t. [[g, 1], [1, g]] >= 0
    ConicProgram p;
    const int gam = p.add_variable(1.0);
    PsdBlock b = diagonal_block(2);
    b.constant << 0, 1, 1, 0;
    b.add_term(gam, 0, 0, 1.0);
    b.add_term(gam, 1, 1, 1.0);
    p.psd_blocks.push_back(b);
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal(gam) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.max_psd_violation < 1e-7);
  }

  TEST_CASE("second-order cone") {
    ConicProgram p;
    const int t = p.add_variable(1.0);
    p.soc_constraints.push_back({{row(0, {{t, 1}}), row(3, {}), row(4, {})}});
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal(t) == doctest::Approx(5.0).epsilon(1e-7));
  }

  TEST_CASE("off-diagonal rank-two term") {
    // min g  s.t. [[g, x], [x, 1]] >= 0, x = 2
    ConicProgram p;
    const int gam = p.add_variable(1.0);
    const int x = p.add_variable(0.0);
    PsdBlock b = diagonal_block(2);
    b.constant(1, 1) = 1.0;
    b.add_term(gam, 0, 0, 1.0);
    b.add_term(x, 0, 1, 2.0);
    p.psd_blocks.push_back(b);
    SparseVector eq;
    eq.push(x, 1.0);
    p.add_equality(eq, 2.0);
    CHECK(b.coefficient(x)(0, 1) == doctest::Approx(1.0));
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal(gam) == doctest::Approx(4.0).epsilon(1e-7));
  }

  TEST_CASE("largest eigenvalue") {
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    const int n = 6;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = g(rng);
    M = 0.5 * (M + M.transpose()).eval();
    ConicProgram p;
    const int t = p.add_variable(1.0);
    PsdBlock b = diagonal_block(n);
    b.constant = -M;
    for (int i = 0; i < n; ++i) b.add_term(t, i, i, 1.0);
    p.psd_blocks.push_back(b);
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    CHECK(r.objective_value == doctest::Approx(es.eigenvalues()(n - 1)).epsilon(1e-7));
  }

  TEST_CASE("mixed cones with eliminated variables") {
    const ConicProgram p = mixed_program();
    const auto st = detail::build_structure(p);
    CHECK(st.dense_vars.size() == 1);
    CHECK(st.sparse_vars.size() == 3);
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective_value == doctest::Approx(std::sqrt(7.25) + std::sqrt(3.25)).epsilon(1e-7));
    CHECK(r.primal(0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.violations.max_eq_violation < 1e-7);
  }

  TEST_CASE("primal infeasible") {
    ConicProgram p;
    const int x = p.add_variable(1.0);
    p.nonneg_vars.push_back(x);
    SparseVector eq;
    eq.push(x, 1.0);
    p.add_equality(eq, -1.0);
    CHECK(solve(p).status == SolveStatus::Infeasible);
  }

  TEST_CASE("unbounded") {
    ConicProgram p;
    const int x = p.add_variable(-1.0);
    p.nonneg_vars.push_back(x);
    CHECK(solve(p).status == SolveStatus::Unbounded);
  }

  TEST_CASE("check_solution reports the minimum eigenvalue") {
    ConicProgram p;
    const int gam = p.add_variable(1.0);
    PsdBlock b = diagonal_block(2);
    b.constant << 0, 1, 1, 0;
    b.add_term(gam, 0, 0, 1.0);
    b.add_term(gam, 1, 1, 1.0);
    p.psd_blocks.push_back(b);
    const auto v = check_solution(p, Eigen::VectorXd::Zero(1));
    REQUIRE(v.psd_min_eigenvalues.size() == 1);
    CHECK(v.psd_min_eigenvalues[0] == doctest::Approx(-1.0));
    CHECK(v.max_psd_violation == doctest::Approx(1.0));
  }

  TEST_CASE("text round trip is exact") {
    ConicProgram p = mixed_program();
    p.psd_blocks.push_back(random_program(5, 8, 3).psd_blocks[0]);
    p.num_vars = std::max(p.num_vars, 8);
    p.objective.conservativeResize(p.num_vars);
    p.objective.tail(p.num_vars - 4).setConstant(0.1 / 3.0);
    std::stringstream ss;
    write_program(ss, p);
    const ConicProgram q = read_program(ss);
    std::stringstream s2;
    write_program(s2, q);
    CHECK(ss.str() == s2.str());
    CHECK((p.objective - q.objective).norm() == 0.0);
    CHECK((p.psd_blocks[1].constant - q.psd_blocks[1].constant).norm() == 0.0);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(p.num_vars, -1.0, 1.0);
    CHECK((p.psd_blocks[1].evaluate(x) - q.psd_blocks[1].evaluate(x)).norm() == 0.0);
  }

  TEST_CASE("validate rejects bad indices") {
    ConicProgram p;
    p.add_variable(1.0);
    p.nonneg_vars.push_back(3);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
}

TEST_SUITE("conic internals") {
  TEST_CASE("Nesterov-Todd scaling maps s and z to the same point") {
    ConicProgram p = mixed_program();
    p.psd_blocks.push_back(random_program(4, 3, 11).psd_blocks[0]);
    const auto st = detail::build_structure(p);
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    auto interior = [&] {
      detail::ConeVec v = detail::zeros_like(st);
      for (auto& m : v.psd) {
        Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(m.rows(), m.cols(), [&] { return g(rng); });
        m = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(m.rows(), m.cols());
      }
      for (const auto& c : st.small) {
        auto seg = v.small.segment(c.offset, c.dim);
        for (int i = 1; i < c.dim; ++i) seg(i) = g(rng);
        seg(0) = seg.tail(c.dim - 1).norm() + 0.5 + std::abs(g(rng));
      }
      return v;
    };
    const auto s = interior();
    const auto z = interior();
    detail::Scaling sc;
    REQUIRE(detail::compute_scaling(st, s, z, sc));
    const auto wz = detail::apply_W(st, sc, z);
    const auto wis = detail::apply_Wit(st, sc, s);
    detail::ConeVec diff = wz;
    detail::axpy(-1.0, wis, diff);
    CHECK(detail::norm(diff) < 1e-9 * detail::norm(wz));
    detail::ConeVec dl = wz;
    detail::axpy(-1.0, sc.lambda, dl);
    CHECK(detail::norm(dl) < 1e-9 * detail::norm(wz));
    // W^{-1} W = I
    auto back = detail::apply_Winv(st, sc, wz);
    detail::axpy(-1.0, z, back);
    CHECK(detail::norm(back) < 1e-9 * detail::norm(z));
  }

  TEST_CASE("lambda_divide inverts the Jordan product") {
    const ConicProgram p = mixed_program();
    const auto st = detail::build_structure(p);
    detail::ConeVec s = detail::identity_element(st), z = detail::identity_element(st);
    s.small << 2.0, 0.5, -0.3, 3.0, 1.0, 1.0, 1.5;
    z.small << 1.0, 0.2, 0.1, 2.0, -0.4, 0.9, 0.7;
    s.psd[0](0, 0) = 3.0;
    z.psd[0](0, 0) = 0.25;
    detail::Scaling sc;
    REQUIRE(detail::compute_scaling(st, s, z, sc));
    detail::ConeVec d = detail::zeros_like(st);
    d.small << 0.3, -1.0, 2.0, 0.1, 0.5, -0.2, 0.8;
    d.psd[0](0, 0) = -0.7;
    const auto u = detail::lambda_divide(st, sc, d);
    auto back = detail::jordan(st, sc.lambda, u);
    detail::axpy(-1.0, d, back);
    CHECK(detail::norm(back) < 1e-12);
  }

  TEST_CASE("normal-matrix kernels agree with the dense trace formula") {
    const ConicProgram p = random_program(7, 12, 21);
    const auto st = detail::build_structure(p);
    const auto& blk = st.psd[0];
    std::mt19937 rng(9);
    std::normal_distribution<double> g;
    Eigen::MatrixXd Rinv = Eigen::MatrixXd::NullaryExpr(7, 7, [&] { return g(rng); });
    Rinv.diagonal().array() += 4.0;
    const Eigen::MatrixXd V = Rinv.transpose() * Rinv;
    const Eigen::MatrixXd Vd = detail::atom_gram(blk, &Rinv);
    const int m = st.m;
    Eigen::MatrixXd Hp = Eigen::MatrixXd::Zero(m, m), Hs = Hp;
    detail::accumulate_psd_normal(blk, Vd, st.dense_index, Hp);
    detail::accumulate_psd_normal_serial(blk, Vd, st.dense_index, Hs);
    CHECK((Hp - Hs).norm() == 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        const Eigen::MatrixXd Fi = p.psd_blocks[0].coefficient(i), Fj = p.psd_blocks[0].coefficient(j);
        const double ref = (Fi * V * Fj * V).trace();
        CHECK(Hs(i, j) == doctest::Approx(ref).epsilon(1e-10));
      }
  }

  TEST_CASE("parallel and serial assembly give the same solve") {
    const ConicProgram p = random_program(8, 10, 2);
    SolverOptions o;
    o.parallel_assembly = false;
    const auto a = solve(p, o);
    o.parallel_assembly = true;
    const auto b = solve(p, o);
    REQUIRE(a.status == b.status);
    if (a.status == SolveStatus::Optimal) {
      CHECK(a.objective_value == doctest::Approx(b.objective_value).epsilon(1e-9));
    }
  }
}
