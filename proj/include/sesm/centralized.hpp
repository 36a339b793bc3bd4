// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0
//
// Centralized market clearing: one convex QP whose optimum is the
// variational equilibrium of the capacity-renting game, plus the
// certification machinery (shared-dual KKT check and best-response check).
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sesm/model.hpp"
#include "sesm/qp.hpp"

namespace sesm {

class SolveError : public std::runtime_error {
 public:
  SolveError(QpStatus status, const std::string& what)
      : std::runtime_error(what), status(status) {}
  QpStatus status;
};

struct SolveDiagnostics {
  std::string backend;
  QpStatus status = QpStatus::MaxIter;
  int iterations = 0;
  QpResiduals residuals;
  double feas_tol = 0;          // tolerance at which feasibility was re-checked
  double wall_seconds = 0;
  double parallel_seconds = 0;  // max per-agent cumulative subproblem time
  double final_gap = 0;         // distributed backends only
  int admm_iterations = 0;
};

// Signed row duals of the social QP in the model's two-sided row convention;
// retained so equilibrium certification can rebuild one-sided duals exactly.
struct CentralDuals {
  std::vector<Vec> local_rows;  // per prosumer
  Vec shared_rows;              // caps then antisymmetry, canonical order
};

struct EquilibriumResult {
  std::vector<ProsumerDecision> decisions;
  std::vector<CostBreakdown> costs;  // c_ses_rent filled with realized prices
  double ses_revenue = 0;            // sum of rent + usage payments
  double lambda_s = 0, lambda_p = 0;
  double cap_dual_p = 0, cap_dual_s = 0;  // shared duals of the capacity caps
  double social_obj = 0;
  SolveDiagnostics diagnostics;
  std::shared_ptr<const CentralDuals> duals;  // centralized backend only
};

// Stacked two-sided system used by the solver; kept public so the
// distributed backends and the verifier agree on row bookkeeping.
struct SocialSystem {
  SpMat H;
  Vec g;
  SpMat C;
  Vec lo, hi;
  int vars_per_prosumer = 0;
  std::vector<int> local_row_begin, local_row_count;  // per prosumer
  int shared_row_begin = 0, shared_row_count = 0;
};

SocialSystem build_social_system(const Scenario& s);

// One-sided standard form of the same program (inequalities + equalities).
QpProblem build_social_qp(const Scenario& s);

EquilibriumResult solve_equilibrium(const Scenario& s, double tol = 1e-6);

struct VeReport {
  bool kkt_available = false;
  double kkt_stationarity = 0;
  double kkt_primal = 0;
  double kkt_complementarity = 0;  // max per-row |mu * slack|
  double kkt_dual_sign = 0;
  bool kkt_pass = false;
  bool shared_dual_skipped = false;  // capacity market disabled in this case
  std::vector<double> br_delta;      // per-prosumer best-response improvement
  double br_worst = 0;               // max normalized improvement
  bool br_pass = false;
  bool pass() const { return (!kkt_available || kkt_pass) && br_pass; }
};

VeReport verify_variational_equilibrium(const Scenario& s, const EquilibriumResult& r,
                                        double tol = 1e-5);

}  // namespace sesm
