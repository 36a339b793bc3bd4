// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0
#include "sesm/qp.hpp"

#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "sesm/util.hpp"

using namespace sesm;
using sesm_test::enumerate_qp;

namespace {

SpMat dense_to_sparse(const Eigen::MatrixXd& M) {
  std::vector<Triplet> tr;
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) tr.emplace_back(i, j, M(i, j));
  SpMat S(M.rows(), M.cols());
  S.setFromTriplets(tr.begin(), tr.end());
  return S;
}

QpProblem make_problem(const Eigen::MatrixXd& H, const Vec& g, const Eigen::MatrixXd& A,
                       const Vec& b, const Eigen::MatrixXd& Aeq, const Vec& beq) {
  QpProblem p;
  p.H = dense_to_sparse(H);
  p.g = g;
  p.A = dense_to_sparse(A);
  p.b = b;
  p.Aeq = dense_to_sparse(Aeq);
  p.beq = beq;
  return p;
}

}  // namespace

TEST_CASE("qp: scalar bound, duals by hand") {
  // min x^2 s.t. x >= 1  ->  x* = 1, inequality dual 2
  Eigen::MatrixXd H(1, 1), A(1, 1), Aeq(0, 1);
  H << 2.0;
  A << -1.0;
  Vec g = Vec::Zero(1), b(1), beq(0);
  b << -1.0;
  auto sol = solve_qp(make_problem(H, g, A, b, Aeq, beq), 1e-8);
  REQUIRE(sol.status == QpStatus::Solved);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.mu[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("qp: simplex equality, symmetric optimum") {
  // min ||x||^2 s.t. sum x = 1 (n=3) -> x = 1/3, nu = -2/3
  Eigen::MatrixXd H = 2.0 * Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd A(0, 3), Aeq(1, 3);
  Aeq << 1, 1, 1;
  Vec g = Vec::Zero(3), b(0), beq(1);
  beq << 1.0;
  auto sol = solve_qp(make_problem(H, g, A, b, Aeq, beq), 1e-8);
  REQUIRE(sol.status == QpStatus::Solved);
  for (int i = 0; i < 3; ++i) CHECK(sol.x[i] == doctest::Approx(1.0 / 3).epsilon(1e-7));
  CHECK(sol.nu[0] == doctest::Approx(-2.0 / 3).epsilon(1e-6));
}

TEST_CASE("qp: kkt_residuals on exact and perturbed points") {
  Eigen::MatrixXd H(2, 2), A(1, 2), Aeq(0, 2);
  H << 2, 0, 0, 2;
  A << -1, 0;
  Vec g(2), b(1), beq(0);
  g << 0, -2;
  b << -1;
  auto p = make_problem(H, g, A, b, Aeq, beq);
  QpSolution exact;
  exact.x = Vec(2);
  exact.x << 1.0, 1.0;  // x2 unconstrained: 2 x2 - 2 = 0
  exact.mu = Vec(1);
  exact.mu << 2.0;
  exact.nu = Vec(0);
  auto r0 = kkt_residuals(p, exact);
  CHECK(r0.stationarity <= 1e-12);
  CHECK(r0.primal <= 1e-12);
  CHECK(r0.complementarity <= 1e-12);

  for (double delta : {1e-6, 1e-4, 1e-2}) {
    QpSolution pert = exact;
    pert.x[0] += delta;
    auto r = kkt_residuals(p, pert);
    CHECK(r.stationarity == doctest::Approx(2.0 * delta).epsilon(1e-6));
  }

  auto sol = solve_qp(p, 1e-8);
  auto r = kkt_residuals(p, sol);
  CHECK(r.stationarity <= 1e-8);
  CHECK(r.primal <= 1e-8);
}

TEST_CASE("qp: random strictly convex instances vs enumeration oracle") {
  Rng rng(20260810);
  int solved = 0;
  for (int inst = 0; inst < 30; ++inst) {
    int n = 4 + (int)rng.uniform_u64(17);  // up to 20
    int mi = 2 + (int)rng.uniform_u64(9);  // up to 10
    int me = (int)rng.uniform_u64(3);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
    Eigen::MatrixXd H = M.transpose() * M + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = 3.0 * rng.normal();
    Eigen::MatrixXd A(mi, n), Aeq(me, n);
    for (int r = 0; r < mi; ++r)
      for (int j = 0; j < n; ++j) A(r, j) = rng.normal();
    for (int r = 0; r < me; ++r)
      for (int j = 0; j < n; ++j) Aeq(r, j) = rng.normal();
    Vec b(mi), beq(me);
    for (int r = 0; r < mi; ++r) b[r] = 0.05 + rng.uniform(0.0, 1.0);  // x=0 feasible
    for (int r = 0; r < me; ++r) beq[r] = 0.0;

    auto oracle = enumerate_qp(H, g, A, b, Aeq, beq);
    REQUIRE(oracle.found);
    auto sol = solve_qp(make_problem(H, g, A, b, Aeq, beq), 1e-6);
    REQUIRE(sol.status == QpStatus::Solved);
    CHECK(std::abs(sol.objective - oracle.objective) <= 1e-6 * (1.0 + std::abs(oracle.objective)));
    CHECK(sol.residuals.stationarity <= 1e-6);
    CHECK(sol.residuals.primal <= 1e-6);
    ++solved;
  }
  CHECK(solved == 30);
}

TEST_CASE("qp: determinism and scaling covariance") {
  Rng rng(7);
  int n = 12, mi = 6;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
  Eigen::MatrixXd H = M.transpose() * M + Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd A(mi, n), Aeq(0, n);
  for (int r = 0; r < mi; ++r)
    for (int j = 0; j < n; ++j) A(r, j) = rng.normal();
  Vec g(n), b(mi), beq(0);
  for (int i = 0; i < n; ++i) g[i] = rng.normal();
  for (int r = 0; r < mi; ++r) b[r] = 0.1;
  auto p = make_problem(H, g, A, b, Aeq, beq);

  auto s1 = solve_qp(p, 1e-8);
  auto s2 = solve_qp(p, 1e-8);
  REQUIRE(s1.status == QpStatus::Solved);
  CHECK(s1.x == s2.x);  // bit-identical
  CHECK(s1.mu == s2.mu);

  const double c = 37.5;
  auto pc = make_problem(c * H, Vec(c * g), A, b, Aeq, beq);
  auto sc = solve_qp(pc, 1e-8);
  REQUIRE(sc.status == QpStatus::Solved);
  CHECK((s1.x - sc.x).cwiseAbs().maxCoeff() <= 1e-6);
  for (int r = 0; r < mi; ++r)
    CHECK(sc.mu[r] == doctest::Approx(c * s1.mu[r]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("qp: infeasible and unbounded detection") {
  // x <= -1 and x >= 1 simultaneously
  Eigen::MatrixXd H(1, 1), A(2, 1), Aeq(0, 1);
  H << 2;
  A << 1, -1;
  Vec g = Vec::Zero(1), b(2), beq(0);
  b << -1, -1;
  auto sol = solve_qp(make_problem(H, g, A, b, Aeq, beq), 1e-6, 5000);
  CHECK(sol.status == QpStatus::PrimalInfeasible);

  // min x s.t. x <= 0: unbounded below
  Eigen::MatrixXd H0 = Eigen::MatrixXd::Zero(1, 1), A2(1, 1);
  A2 << 1;
  Vec g2(1), b2(1);
  g2 << 1;
  b2 << 0;
  auto sol2 = solve_qp(make_problem(H0, g2, A2, b2, Aeq, beq), 1e-6, 5000);
  CHECK(sol2.status == QpStatus::DualInfeasible);
}

TEST_CASE("qp: singular H with active box rows") {
  // linear cost on x2, quadratic on x1 only
  Eigen::MatrixXd H(2, 2), A(3, 2), Aeq(0, 2);
  H << 2, 0, 0, 0;
  A << 1, 0, 0, 1, 0, -1;
  Vec g(2), b(3), beq(0);
  g << -2, 1;  // min x1^2-2x1 + x2, with -1<=x2<=2, x1<=2
  b << 2, 2, 1;
  auto sol = solve_qp(make_problem(H, g, A, b, Aeq, beq), 1e-7);
  REQUIRE(sol.status == QpStatus::Solved);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.x[1] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("qp: problem dump/load round trip") {
  Rng rng(99);
  Eigen::MatrixXd H(3, 3), A(2, 3), Aeq(1, 3);
  H.setZero();
  H(0, 0) = 2;
  H(1, 1) = 4;
  H(2, 2) = 1;
  A << 1, 0, -1, 0, 2, 0.5;
  Aeq << 1, 1, 1;
  Vec g(3), b(2), beq(1);
  g << rng.normal(), rng.normal(), rng.normal();
  b << 1, 2;
  beq << 0.5;
  auto p = make_problem(H, g, A, b, Aeq, beq);
  std::stringstream ss;
  dump_problem(p, ss);
  auto p2 = load_problem(ss);
  auto s1 = solve_qp(p, 1e-8), s2 = solve_qp(p2, 1e-8);
  CHECK(s1.x == s2.x);
  CHECK(Vec(p.g) == Vec(p2.g));
}
