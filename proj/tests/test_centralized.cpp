// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0
#include "sesm/centralized.hpp"

#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "sesm/util.hpp"

using namespace sesm;
using sesm_test::make_tiny_scenario;

namespace {

double qp_objective(const QpProblem& p, const Vec& x) {
  return 0.5 * x.dot(p.H * x) + p.g.dot(x);
}

Vec stack_decisions(const Scenario& s, const std::vector<ProsumerDecision>& all) {
  VarLayout L(s.num_prosumers(), s.periods());
  Vec x((long)s.num_prosumers() * L.size());
  for (int i = 0; i < s.num_prosumers(); ++i) x.segment((long)i * L.size(), L.size()) = L.pack(all[i]);
  return x;
}

}  // namespace

TEST_CASE("centralized: degenerate objective reduces to local cost") {
  auto s = make_tiny_scenario();
  s.prosumers.resize(1);
  s.network.impedance = Eigen::MatrixXd::Zero(1, 1);
  s.flags = {false, false};
  auto p = build_social_qp(s);
  Rng rng(404);
  for (int rep = 0; rep < 10; ++rep) {
    auto d = sesm_test::random_decision(rng, 1, s.periods(), 1.0);
    d.ses_p_max = 0;
    d.ses_s_max = 0;  // capacity market disabled in this case
    std::vector<ProsumerDecision> all{d};
    CHECK(qp_objective(p, stack_decisions(s, all)) ==
          doctest::Approx(cost_local(s, 0, d).total).epsilon(1e-10));
  }
}

TEST_CASE("centralized: capacity quadratic expands as expected") {
  auto s = make_tiny_scenario();
  s.prosumers.resize(2);
  s.network.impedance = Eigen::MatrixXd::Zero(2, 2);
  s.ses.a_s = 0;
  s.ses.b_s = 2;
  s.ses.a_p = 0;
  s.ses.b_p = 0;
  auto p = build_social_qp(s);
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    double s1 = rng.uniform(0, 5), s2 = rng.uniform(0, 5);
    std::vector<ProsumerDecision> all(2, ProsumerDecision::zero(2, s.periods()));
    all[0].ses_s_max = s1;
    all[1].ses_s_max = s2;
    double expect = (s1 + s2) * (s1 + s2) + s1 * s1 + s2 * s2;
    CHECK(qp_objective(p, stack_decisions(s, all)) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("centralized: objective equals model evaluators at random points") {
  auto s = make_tiny_scenario();
  auto p = build_social_qp(s);
  Rng rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<ProsumerDecision> all;
    for (int i = 0; i < s.num_prosumers(); ++i) {
      auto d = sesm_test::random_decision(rng, s.num_prosumers(), s.periods(), 2.0);
      d.p2p.row(i).setZero();
      d.p2p_pos.row(i).setZero();
      d.ses_s_max = std::abs(d.ses_s_max);
      d.ses_p_max = std::abs(d.ses_p_max);
      all.push_back(d);
    }
    double direct = social_objective(s, all);
    CHECK(qp_objective(p, stack_decisions(s, all)) ==
          doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("centralized: dead market clears to zero") {
  auto s = make_tiny_scenario();
  for (auto& p : s.prosumers) {
    p.load.assign(s.periods(), 0.0);
    p.dg.assign(s.periods(), 0.0);
  }
  auto r = solve_equilibrium(s, 1e-7);
  CHECK(std::abs(r.social_obj) <= 1e-6);
  for (auto& c : r.costs) CHECK(std::abs(c.total) <= 1e-6);
  for (auto& d : r.decisions) {
    CHECK(std::abs(d.ses_s_max) <= 1e-6);
    for (double v : d.buy) CHECK(std::abs(v) <= 1e-6);
  }
}

TEST_CASE("centralized: welfare ordering across cases on tiny-3") {
  auto s = make_tiny_scenario();
  double obj[5];
  for (int c = 1; c <= 4; ++c) {
    auto r = solve_equilibrium(s.with_flags(case_flags(c)), 1e-7);
    obj[c] = r.social_obj;
  }
  const double tol = 1e-5;
  CHECK(obj[4] <= obj[3] + tol);
  CHECK(obj[3] <= obj[1] + tol);
  CHECK(obj[2] <= obj[1] + tol);
  CHECK(obj[4] <= obj[2] + tol);
}

TEST_CASE("centralized: two-prosumer storage market matches grid search") {
  Scenario s;
  s.name = "grid-oracle";
  s.horizon = {2, 1.0};
  s.tariffs.buy = {0.5, 1.2};
  s.tariffs.sell = {0.2, 0.3};
  ProsumerParams a, b;
  a.id = 1;
  a.load = {0, 4};
  a.dg = {3, 0};
  a.alpha_sh = 0;
  a.lambda_sh = 0.01;
  a.lambda_tr_ses = 0.01;
  b.id = 2;
  b.load = {1, 3};
  b.dg = {2.5, 0};
  b.alpha_sh = 0;
  b.lambda_sh = 0.01;
  b.lambda_tr_ses = 0.01;
  s.prosumers = {a, b};
  s.ses.p_cap = 6;
  s.ses.s_cap = 8;
  s.ses.eta = 0.9;
  s.ses.soc_min = 0;
  s.ses.soc_max = 1;
  s.ses.soc0 = 0;
  s.ses.lambda_u = 0.02;
  s.ses.a_s = 0.1;
  s.ses.b_s = 0.05;
  s.ses.a_p = 0.1;
  s.ses.b_p = 0.05;
  s.network.impedance = Eigen::MatrixXd::Zero(2, 2);
  s.flags = {false, true};

  auto r = solve_equilibrium(s, 1e-8);

  // exhaustive search over storage net dispatch, everything else settled in
  // closed form (grid covers imbalance; minimal rents are optimal since
  // capacity prices are increasing)
  const double h = 0.2, lim = 3.0;
  const double eta = s.ses.eta;
  auto leg_cost = [&](int i, double u0, double u1, double& S, double& P) {
    double ch0 = std::max(u0, 0.0), dis0 = std::max(-u0, 0.0);
    double ch1 = std::max(u1, 0.0), dis1 = std::max(-u1, 0.0);
    double cum1 = eta * ch0 - dis0 / eta;
    double cum2 = cum1 + eta * ch1 - dis1 / eta;
    if (cum1 < -1e-12 || cum2 < -1e-12) return 1e18;
    S = std::max(cum1, cum2);
    P = std::max({ch0, dis0, ch1, dis1});
    double cost = 0;
    const auto& pr = s.prosumers[i];
    for (int t = 0; t < 2; ++t) {
      double ch = t == 0 ? ch0 : ch1, dis = t == 0 ? dis0 : dis1;
      double imb = pr.load[t] - pr.dg[t] + ch - dis;
      cost += s.tariffs.buy[t] * std::max(imb, 0.0) - s.tariffs.sell[t] * std::max(-imb, 0.0);
      cost += (s.ses.lambda_u + pr.lambda_tr_ses) * (ch + dis);
    }
    return cost;
  };
  double best = 1e18;
  for (double a0 = -lim; a0 <= lim + 1e-9; a0 += h)
    for (double a1 = -lim; a1 <= lim + 1e-9; a1 += h) {
      double Sa, Pa;
      double ca = leg_cost(0, a0, a1, Sa, Pa);
      if (ca > 1e17) continue;
      for (double b0 = -lim; b0 <= lim + 1e-9; b0 += h)
        for (double b1 = -lim; b1 <= lim + 1e-9; b1 += h) {
          double Sb, Pb;
          double cb = leg_cost(1, b0, b1, Sb, Pb);
          if (cb > 1e17) continue;
          if (Sa + Sb > s.ses.s_cap || Pa + Pb > s.ses.p_cap) continue;
          double sumS = Sa + Sb, sumP = Pa + Pb;
          double quad = 0.5 * s.ses.b_s * sumS * sumS + s.ses.a_s * sumS +
                        0.5 * s.ses.b_s * (Sa * Sa + Sb * Sb) +
                        0.5 * s.ses.b_p * sumP * sumP + s.ses.a_p * sumP +
                        0.5 * s.ses.b_p * (Pa * Pa + Pb * Pb);
          best = std::min(best, ca + cb + quad);
        }
    }
  CHECK(r.social_obj <= best + 1e-7);           // grid point can never beat the optimum
  CHECK(best - r.social_obj <= 2.0 * h + 1e-7);  // and lands within discretization error
}

TEST_CASE("centralized: equilibrium certificate on tiny-3") {
  auto s = make_tiny_scenario();
  auto r = solve_equilibrium(s, 1e-8);

  SUBCASE("kkt with equalized shared duals and best responses pass") {
    auto rep = verify_variational_equilibrium(s, r, 1e-5);
    CHECK(rep.kkt_available);
    CHECK(rep.kkt_pass);
    CHECK(rep.br_pass);
    CHECK(!rep.shared_dual_skipped);
    CHECK(rep.pass());
  }

  SUBCASE("price consistency and realized rents") {
    auto [ls, lp] = capacity_prices(s.ses, r.decisions);
    CHECK(r.lambda_s == doctest::Approx(ls));
    CHECK(r.lambda_p == doctest::Approx(lp));
    double rev = 0;
    for (auto& c : r.costs) rev += c.c_ses_rent + c.c_ses_use;
    CHECK(r.ses_revenue == doctest::Approx(rev));
  }

  SUBCASE("perturbing a rented capacity breaks the best-response check") {
    auto bad = r;
    bad.duals.reset();
    bad.decisions[0].ses_s_max += 1.0;
    auto rep = verify_variational_equilibrium(s, bad, 1e-5);
    CHECK(!rep.kkt_available);
    CHECK(rep.br_delta[0] > 0.0);
    CHECK(!rep.br_pass);
  }

  SUBCASE("solution sanity: no simultaneous buy/sell, trades covered") {
    for (int i = 0; i < s.num_prosumers(); ++i) {
      const auto& d = r.decisions[i];
      for (int t = 0; t < s.periods(); ++t) {
        CHECK(d.buy[t] * d.sell[t] <= 1e-6);
        for (int j = 0; j < s.num_prosumers(); ++j)
          if (j != i)
            CHECK(std::abs(d.p2p_pos(j, t) - std::max(0.0, d.p2p(j, t))) <= 1e-5);
      }
    }
  }
}

TEST_CASE("centralized: ses-disabled case reports the dual check skipped") {
  auto s = make_tiny_scenario().with_flags(case_flags(2));
  auto r = solve_equilibrium(s, 1e-8);
  auto rep = verify_variational_equilibrium(s, r, 1e-5);
  CHECK(rep.shared_dual_skipped);
  CHECK(rep.pass());
}

TEST_CASE("centralized: invalid initial state of charge is rejected") {
  auto s = make_tiny_scenario();
  s.prosumers[1].ess->soc0 = 0.95;  // above soc_max
  CHECK_THROWS_AS(solve_equilibrium(s, 1e-6), ScenarioInvariantError);
}
