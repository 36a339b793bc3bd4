// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0
//
// Self-contained convex QP solver with dual recovery. The method is an
// operator-splitting scheme on the KKT system (Ruiz-equilibrated, with
// over-relaxation and an active-set polish step for high-accuracy duals).
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sesm/util.hpp"

namespace sesm {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

enum class QpStatus { Solved, MaxIter, PrimalInfeasible, DualInfeasible };

const char* to_string(QpStatus s);

struct QpProblem {
  SpMat H;   // n x n symmetric PSD cost matrix (full, not triangular)
  Vec g;     // n
  SpMat A;   // m_in x n, A x <= b
  Vec b;
  SpMat Aeq;  // m_eq x n, Aeq x = beq
  Vec beq;

  Eigen::Index num_vars() const { return g.size(); }
  void validate() const;  // throws InvalidInput on inconsistent shapes / asymmetric H
};

struct QpResiduals {
  double stationarity = 0;     // ||H x + g + A' mu + Aeq' nu||_inf
  double primal = 0;           // max((A x - b)_+, |Aeq x - beq|)
  double complementarity = 0;  // |mu'(A x - b)|
  double dual_sign = 0;        // max(0, -min(mu))
};

struct QpSolution {
  Vec x;
  Vec mu;   // inequality duals (>= 0 when Solved)
  Vec nu;   // equality duals
  QpStatus status = QpStatus::MaxIter;
  int iterations = 0;
  QpResiduals residuals;
  double objective = 0;
};

struct QpSettings {
  double tol = 1e-6;
  int max_iter = 20000;
  double sigma = 1e-6;
  double alpha = 1.6;
  double rho0 = 0.1;
  bool adaptive_rho = true;
  bool polish = true;
  int check_every = 25;
};

// Core solver over the two-sided form  min 1/2 x'Px + q'x  s.t. lo <= Cx <= hi.
// The sparsity structure is fixed at construction; solve() may be called
// repeatedly with new q/lo/hi, reusing the symbolic factorization (and the
// numeric one while the penalty stays put). Warm-starts from the previous
// solution unless reset_warm_start() is called.
class QpSolver {
 public:
  QpSolver(SpMat P, SpMat C, QpSettings settings = {});
  ~QpSolver();
  QpSolver(QpSolver&&) noexcept;
  QpSolver& operator=(QpSolver&&) noexcept;

  struct Result {
    Vec x;
    Vec y;  // row duals: y_i >= 0 pushes Cx down to hi, y_i <= 0 up to lo
    QpStatus status = QpStatus::MaxIter;
    int iterations = 0;
  };
  Result solve(const Vec& q, const Vec& lo, const Vec& hi);
  void reset_warm_start();
  const QpSettings& settings() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

QpSolution solve_qp(const QpProblem& p, double tol = 1e-6, int max_iter = 20000);

// Pure re-evaluation of the solution's KKT residuals; no solver state used.
QpResiduals kkt_residuals(const QpProblem& p, const QpSolution& sol);

// Plain-text matrix dump/load for debugging. Round-trips exactly.
void dump_problem(const QpProblem& p, std::ostream& os);
QpProblem load_problem(std::istream& is);

}  // namespace sesm
