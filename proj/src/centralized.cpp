// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0

#include "sesm/centralized.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace sesm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SocialSystem build_social_system(const Scenario& s) {
  s.validate();
  const int N = s.num_prosumers();
  const int T = s.periods();
  VarLayout L(N, T);
  const int n = L.size();
  SocialSystem sys;
  sys.vars_per_prosumer = n;
  sys.g = Vec::Zero((long)N * n);
  std::vector<Triplet> h_trips, c_trips;
  std::vector<double> lo, hi;

  for (int i = 0; i < N; ++i) {
    std::vector<Triplet> ht;
    Vec g;
    local_cost_terms(s, i, ht, g);
    for (auto& t : ht) h_trips.emplace_back(i * n + t.row(), i * n + t.col(), t.value());
    sys.g.segment((long)i * n, n) = g;
    // capacity-price quadratic: pairwise b(1 + delta_ij) over the rented
    // scalars, linear intercept a on each
    sys.g[(long)i * n + L.ses_s_max()] += s.ses.a_s;
    sys.g[(long)i * n + L.ses_p_max()] += s.ses.a_p;
    for (int j = 0; j < N; ++j) {
      double vs = s.ses.b_s * (i == j ? 2.0 : 1.0);
      double vp = s.ses.b_p * (i == j ? 2.0 : 1.0);
      if (vs != 0) h_trips.emplace_back(i * n + L.ses_s_max(), j * n + L.ses_s_max(), vs);
      if (vp != 0) h_trips.emplace_back(i * n + L.ses_p_max(), j * n + L.ses_p_max(), vp);
    }

    RowBlock rb = local_rows(s, i);
    sys.local_row_begin.push_back((int)lo.size());
    sys.local_row_count.push_back(rb.rows());
    int base = (int)lo.size();
    for (auto& t : rb.trips) c_trips.emplace_back(base + t.row(), i * n + t.col(), t.value());
    lo.insert(lo.end(), rb.lo.begin(), rb.lo.end());
    hi.insert(hi.end(), rb.hi.begin(), rb.hi.end());
  }

  sys.shared_row_begin = (int)lo.size();
  {
    int base = (int)lo.size();
    // the shared row space is identical for every prosumer; stack each
    // prosumer's coefficient block into the same rows
    RowBlock ref = shared_rows_for(s, 0);
    for (int i = 0; i < N; ++i) {
      RowBlock rb = shared_rows_for(s, i);
      for (auto& t : rb.trips) c_trips.emplace_back(base + t.row(), i * n + t.col(), t.value());
    }
    lo.insert(lo.end(), ref.lo.begin(), ref.lo.end());
    hi.insert(hi.end(), ref.hi.begin(), ref.hi.end());
    sys.shared_row_count = ref.rows();
  }

  const long m = (long)lo.size();
  sys.H = SpMat((long)N * n, (long)N * n);
  sys.H.setFromTriplets(h_trips.begin(), h_trips.end());
  sys.C = SpMat(m, (long)N * n);
  sys.C.setFromTriplets(c_trips.begin(), c_trips.end());
  sys.lo = Eigen::Map<Vec>(lo.data(), m);
  sys.hi = Eigen::Map<Vec>(hi.data(), m);
  return sys;
}

QpProblem build_social_qp(const Scenario& s) {
  SocialSystem sys = build_social_system(s);
  QpProblem p;
  p.H = sys.H;
  p.g = sys.g;
  std::vector<Triplet> a_trips, e_trips;
  std::vector<double> b, beq;
  SpMat rows = SpMat(sys.C.transpose());
  for (int r = 0; r < sys.C.rows(); ++r) {
    if (sys.lo[r] == sys.hi[r]) {
      int id = (int)beq.size();
      for (SpMat::InnerIterator it(rows, r); it; ++it)
        e_trips.emplace_back(id, (int)it.row(), it.value());
      beq.push_back(sys.lo[r]);
      continue;
    }
    if (std::isfinite(sys.hi[r])) {
      int id = (int)b.size();
      for (SpMat::InnerIterator it(rows, r); it; ++it)
        a_trips.emplace_back(id, (int)it.row(), it.value());
      b.push_back(sys.hi[r]);
    }
    if (std::isfinite(sys.lo[r])) {
      int id = (int)b.size();
      for (SpMat::InnerIterator it(rows, r); it; ++it)
        a_trips.emplace_back(id, (int)it.row(), -it.value());
      b.push_back(-sys.lo[r]);
    }
  }
  p.A = SpMat((long)b.size(), sys.C.cols());
  p.A.setFromTriplets(a_trips.begin(), a_trips.end());
  p.b = Eigen::Map<Vec>(b.data(), (long)b.size());
  p.Aeq = SpMat((long)beq.size(), sys.C.cols());
  p.Aeq.setFromTriplets(e_trips.begin(), e_trips.end());
  p.beq = Eigen::Map<Vec>(beq.data(), (long)beq.size());
  return p;
}

EquilibriumResult solve_equilibrium(const Scenario& s, double tol) {
  auto t0 = std::chrono::steady_clock::now();
  SocialSystem sys = build_social_system(s);
  const int N = s.num_prosumers();
  const int T = s.periods();
  VarLayout L(N, T);

  QpSettings st;
  st.tol = tol;
  QpSolver solver(sys.H, sys.C, st);
  auto res = solver.solve(sys.g, sys.lo, sys.hi);
  if (res.status != QpStatus::Solved)
    throw SolveError(res.status, std::string("centralized clearing failed: ") +
                                     to_string(res.status));

  EquilibriumResult out;
  out.decisions.reserve(N);
  for (int i = 0; i < N; ++i)
    out.decisions.push_back(L.unpack(res.x.segment((long)i * sys.vars_per_prosumer,
                                                   sys.vars_per_prosumer)));

  auto [ls, lp] = capacity_prices(s.ses, out.decisions);
  out.lambda_s = ls;
  out.lambda_p = lp;
  out.ses_revenue = 0;
  for (int i = 0; i < N; ++i) {
    CostBreakdown c = cost_local(s, i, out.decisions[i]);
    c.c_ses_rent = cost_rent(s.ses, out.decisions[i], out.decisions);
    c.refresh_total();
    out.costs.push_back(c);
    out.ses_revenue += c.c_ses_rent + c.c_ses_use;
  }
  out.social_obj = social_objective(s, out.decisions);

  auto duals = std::make_shared<CentralDuals>();
  for (int i = 0; i < N; ++i)
    duals->local_rows.push_back(res.y.segment(sys.local_row_begin[i], sys.local_row_count[i]));
  duals->shared_rows = res.y.segment(sys.shared_row_begin, sys.shared_row_count);
  out.cap_dual_p = std::max(0.0, duals->shared_rows[0]);
  out.cap_dual_s = std::max(0.0, duals->shared_rows[1]);
  out.duals = duals;

  const double feas_tol = 10 * tol;
  for (int i = 0; i < N; ++i) {
    auto v = check_local_feasibility(s, i, out.decisions[i], feas_tol);
    if (!v.empty())
      throw SolveError(QpStatus::MaxIter, "centralized solution violates " + v[0].describe());
  }
  auto vc = check_coupled_feasibility(s, out.decisions, feas_tol);
  if (!vc.empty())
    throw SolveError(QpStatus::MaxIter, "centralized solution violates " + vc[0].describe());

  out.diagnostics.backend = "centralized";
  out.diagnostics.status = QpStatus::Solved;
  out.diagnostics.iterations = res.iterations;
  out.diagnostics.feas_tol = feas_tol;
  out.diagnostics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.diagnostics.parallel_seconds = out.diagnostics.wall_seconds;
  return out;
}

namespace {

// one-sided duals of a two-sided row: (upper, lower) both nonnegative
inline std::pair<double, double> split_dual(double y) {
  return {std::max(y, 0.0), std::max(-y, 0.0)};
}

}  // namespace

VeReport verify_variational_equilibrium(const Scenario& s, const EquilibriumResult& r,
                                        double tol) {
  const int N = s.num_prosumers();
  const int T = s.periods();
  VarLayout L(N, T);
  VeReport rep;
  rep.shared_dual_skipped = !s.flags.ses_enabled;

  double sum_s = 0, sum_p = 0;
  for (auto& d : r.decisions) {
    sum_s += d.ses_s_max;
    sum_p += d.ses_p_max;
  }

  if (r.duals && (int)r.duals->local_rows.size() == N) {
    rep.kkt_available = true;
    double stat = 0, prim = 0, comp = 0, sign = 0;
    for (int i = 0; i < N; ++i) {
      AffineForm af = assemble_affine_form(s, i);
      Vec x = L.pack(r.decisions[i]);

      Vec mu_loc(af.Aloc.rows());
      for (long row = 0; row < af.Aloc.rows(); ++row) {
        auto [up, down] = split_dual(r.duals->local_rows[i][af.loc_origin[row].two_sided_row]);
        mu_loc[row] = af.loc_origin[row].upper ? up : down;
      }
      Vec mu_shr(af.Eshr.rows());
      for (long row = 0; row < af.Eshr.rows(); ++row) {
        auto [up, down] = split_dual(r.duals->shared_rows[af.shr_origin[row].two_sided_row]);
        mu_shr[row] = af.shr_origin[row].upper ? up : down;
      }

      std::vector<Triplet> ht;
      Vec g;
      local_cost_terms(s, i, ht, g);
      SpMat Hl(L.size(), L.size());
      Hl.setFromTriplets(ht.begin(), ht.end());
      Vec grad = Hl * x + g;
      grad[L.ses_s_max()] += s.ses.a_s + s.ses.b_s * sum_s + s.ses.b_s * r.decisions[i].ses_s_max;
      grad[L.ses_p_max()] += s.ses.a_p + s.ses.b_p * sum_p + s.ses.b_p * r.decisions[i].ses_p_max;
      grad += af.Aloc.transpose() * mu_loc;
      grad += af.Eshr.transpose() * mu_shr;
      stat = std::max(stat, grad.cwiseAbs().maxCoeff());

      Vec slack = af.Aloc * x - af.bloc;
      prim = std::max(prim, slack.maxCoeff());
      for (long row = 0; row < slack.size(); ++row)
        comp = std::max(comp, std::abs(mu_loc[row] * slack[row]));
      sign = std::max(sign, mu_loc.size() ? -mu_loc.minCoeff() : 0.0);
    }
    {
      // shared slack: sum of every prosumer's contribution against f
      AffineForm af0 = assemble_affine_form(s, 0);
      Vec total = Vec::Zero(af0.f.size());
      for (int i = 0; i < N; ++i) {
        AffineForm af = assemble_affine_form(s, i);
        total += af.Eshr * L.pack(r.decisions[i]);
      }
      Vec slack = total - af0.f;
      prim = std::max(prim, slack.maxCoeff());
      if (r.duals) {
        Vec mu_shr(af0.Eshr.rows());
        for (long row = 0; row < af0.Eshr.rows(); ++row) {
          auto [up, down] = split_dual(r.duals->shared_rows[af0.shr_origin[row].two_sided_row]);
          mu_shr[row] = af0.shr_origin[row].upper ? up : down;
        }
        for (long row = 0; row < slack.size(); ++row)
          comp = std::max(comp, std::abs(mu_shr[row] * slack[row]));
        sign = std::max(sign, mu_shr.size() ? -mu_shr.minCoeff() : 0.0);
      }
    }
    rep.kkt_stationarity = stat;
    rep.kkt_primal = prim;
    rep.kkt_complementarity = comp;
    rep.kkt_dual_sign = sign;
    rep.kkt_pass = stat <= tol && prim <= tol && comp <= tol && sign <= tol;
  }

  // best response: re-solve each prosumer's problem with everyone else fixed
  rep.br_delta.assign(N, 0.0);
  rep.br_worst = 0;
  for (int i = 0; i < N; ++i) {
    RowBlock rb = local_rows(s, i);
    std::vector<Triplet> c_trips = rb.trips;
    std::vector<double> lo = rb.lo, hi = rb.hi;
    int row = rb.rows();
    auto add_row = [&](std::vector<std::pair<int, double>> cs, double l, double h) {
      for (auto& [c, v] : cs) c_trips.emplace_back(row, c, v);
      lo.push_back(l);
      hi.push_back(h);
      ++row;
    };
    double others_p = sum_p - r.decisions[i].ses_p_max;
    double others_s = sum_s - r.decisions[i].ses_s_max;
    add_row({{L.ses_p_max(), 1.0}}, -kInf, s.ses.p_cap - others_p);
    add_row({{L.ses_s_max(), 1.0}}, -kInf, s.ses.s_cap - others_s);
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      for (int t = 0; t < T; ++t) {
        double fixed = -r.decisions[j].p2p(i, t);
        add_row({{L.p2p(j, t), 1.0}}, fixed, fixed);
      }
    }
    std::vector<Triplet> ht;
    Vec g;
    local_cost_terms(s, i, ht, g);
    ht.emplace_back(L.ses_s_max(), L.ses_s_max(), 2.0 * s.ses.b_s);
    ht.emplace_back(L.ses_p_max(), L.ses_p_max(), 2.0 * s.ses.b_p);
    g[L.ses_s_max()] += s.ses.a_s + s.ses.b_s * others_s;
    g[L.ses_p_max()] += s.ses.a_p + s.ses.b_p * others_p;
    SpMat H(L.size(), L.size());
    H.setFromTriplets(ht.begin(), ht.end());
    SpMat C(row, L.size());
    C.setFromTriplets(c_trips.begin(), c_trips.end());
    QpSettings st;
    st.tol = std::min(tol * 1e-2, 1e-8);
    QpSolver solver(H, C, st);
    auto br = solver.solve(g, Eigen::Map<Vec>(lo.data(), row), Eigen::Map<Vec>(hi.data(), row));
    if (br.status != QpStatus::Solved)
      throw SolveError(br.status, "best-response subproblem failed");
    double br_obj = 0.5 * br.x.dot(H * br.x) + g.dot(br.x);
    CostBreakdown cur = cost_local(s, i, r.decisions[i]);
    double cur_obj = cur.total + cost_rent(s.ses, r.decisions[i], r.decisions);
    rep.br_delta[i] = cur_obj - br_obj;
    rep.br_worst = std::max(rep.br_worst, rep.br_delta[i] / (1.0 + std::abs(cur_obj)));
  }
  rep.br_pass = rep.br_worst <= tol;
  return rep;
}

}  // namespace sesm
