// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0

#include "sesm/qp.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sesm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double clampd(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

}  // namespace

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Solved: return "solved";
    case QpStatus::MaxIter: return "max_iter";
    case QpStatus::PrimalInfeasible: return "primal_infeasible";
    case QpStatus::DualInfeasible: return "dual_infeasible";
  }
  return "unknown";
}

void QpProblem::validate() const {
  const Eigen::Index n = g.size();
  if (H.rows() != n || H.cols() != n) throw InvalidInput("QpProblem: H shape mismatch");
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n))
    throw InvalidInput("QpProblem: A/b shape mismatch");
  if (Aeq.rows() != beq.size() || (Aeq.rows() > 0 && Aeq.cols() != n))
    throw InvalidInput("QpProblem: Aeq/beq shape mismatch");
  SpMat Ht = SpMat(H.transpose());
  SpMat diff = H - Ht;
  double asym = 0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it) asym = std::max(asym, std::abs(it.value()));
  if (asym > 1e-9) throw InvalidInput("QpProblem: H not symmetric");
}

struct QpSolver::Impl {
  QpSettings st;
  int n = 0, m = 0;
  SpMat P, C, Ct;    // unscaled
  SpMat Ps, Cs;      // Ruiz-equilibrated
  Vec D, E;          // x = D .* xs ; constraint rows scaled by E
  double cost_scale = 1.0;

  Vec rho;  // per-row penalty in scaled space
  std::vector<char> eq_row;
  Eigen::SimplicialLDLT<SpMat, Eigen::Upper> ldlt;
  bool pattern_ready = false;

  Vec xs, zs, ys;
  bool warm = false;

  Impl(SpMat P_, SpMat C_, QpSettings s) : st(s), P(std::move(P_)), C(std::move(C_)) {
    n = (int)P.rows();
    m = (int)C.rows();
    if (C.cols() != n && m > 0) throw InvalidInput("QpSolver: C column count mismatch");
    P.makeCompressed();
    C.makeCompressed();
    Ct = SpMat(C.transpose());
    equilibrate();
  }

  void equilibrate() {
    D = Vec::Ones(n);
    E = Vec::Ones(m);
    Ps = P;
    Cs = C;
    for (int pass = 0; pass < 10; ++pass) {
      Vec cn = Vec::Zero(n), rn = Vec::Zero(m);
      for (int k = 0; k < Ps.outerSize(); ++k)
        for (SpMat::InnerIterator it(Ps, k); it; ++it) {
          cn[it.col()] = std::max(cn[it.col()], std::abs(it.value()));
          cn[it.row()] = std::max(cn[it.row()], std::abs(it.value()));
        }
      for (int k = 0; k < Cs.outerSize(); ++k)
        for (SpMat::InnerIterator it(Cs, k); it; ++it) {
          cn[it.col()] = std::max(cn[it.col()], std::abs(it.value()));
          rn[it.row()] = std::max(rn[it.row()], std::abs(it.value()));
        }
      Vec d1(n), e1(m);
      for (int j = 0; j < n; ++j) d1[j] = cn[j] > 1e-12 ? 1.0 / std::sqrt(clampd(cn[j], 1e-8, 1e8)) : 1.0;
      for (int r = 0; r < m; ++r) e1[r] = rn[r] > 1e-12 ? 1.0 / std::sqrt(clampd(rn[r], 1e-8, 1e8)) : 1.0;
      Ps = d1.asDiagonal() * Ps * d1.asDiagonal();
      if (m > 0) Cs = e1.asDiagonal() * Cs * d1.asDiagonal();
      D = D.cwiseProduct(d1);
      E = E.cwiseProduct(e1);
    }
    // cost normalization from the scaled quadratic only, so the KKT
    // factorization can be reused across solves with different gradients
    if (Ps.nonZeros() > 0) {
      Vec cn = Vec::Zero(n);
      for (int k = 0; k < Ps.outerSize(); ++k)
        for (SpMat::InnerIterator it(Ps, k); it; ++it)
          cn[it.col()] = std::max(cn[it.col()], std::abs(it.value()));
      double mean = cn.sum() / n;
      if (mean > 1e-12) cost_scale = 1.0 / clampd(mean, 1e-4, 1e4);
    }
    Ps = cost_scale * Ps;
  }

  void build_kkt() {
    std::vector<Triplet> tr;
    tr.reserve(Ps.nonZeros() + Ct.nonZeros() + n + m);
    for (int k = 0; k < Ps.outerSize(); ++k)
      for (SpMat::InnerIterator it(Ps, k); it; ++it)
        if (it.row() <= it.col()) tr.emplace_back((int)it.row(), (int)it.col(), it.value());
    for (int i = 0; i < n; ++i) tr.emplace_back(i, i, st.sigma);
    for (int k = 0; k < Cs.outerSize(); ++k)
      for (SpMat::InnerIterator it(Cs, k); it; ++it)
        tr.emplace_back((int)it.col(), n + (int)it.row(), it.value());
    for (int r = 0; r < m; ++r) tr.emplace_back(n + r, n + r, -1.0 / rho[r]);
    SpMat K(n + m, n + m);
    K.setFromTriplets(tr.begin(), tr.end());
    K.makeCompressed();
    if (!pattern_ready) {
      ldlt.analyzePattern(K);
      pattern_ready = true;
    }
    ldlt.factorize(K);
    if (ldlt.info() != Eigen::Success) throw InvalidInput("QpSolver: KKT factorization failed");
  }

  void init_rho(const std::vector<char>& eq, double base) {
    rho = Vec::Constant(m, base);
    for (int r = 0; r < m; ++r)
      if (eq[r]) rho[r] = base * 1e3;
  }

  struct Unscaled {
    Vec x, y, z;
    double rp = kInf, rd = kInf;
  };

  Unscaled unscale(const Vec& xs_, const Vec& ys_, const Vec& zs_, const Vec& q) const {
    Unscaled u;
    u.x = D.cwiseProduct(xs_);
    u.y = E.cwiseProduct(ys_) / cost_scale;
    u.z = m > 0 ? Vec(zs_.cwiseQuotient(E)) : Vec();
    Vec Cx = m > 0 ? Vec(C * u.x) : Vec();
    u.rp = m > 0 ? inf_norm(Cx - u.z) : 0.0;
    Vec rd = P * u.x + q;
    if (m > 0) rd += Ct * u.y;
    u.rd = inf_norm(rd);
    return u;
  }
};

QpSolver::QpSolver(SpMat P, SpMat C, QpSettings settings)
    : impl_(std::make_unique<Impl>(std::move(P), std::move(C), settings)) {}
QpSolver::~QpSolver() = default;
QpSolver::QpSolver(QpSolver&&) noexcept = default;
QpSolver& QpSolver::operator=(QpSolver&&) noexcept = default;

void QpSolver::reset_warm_start() { impl_->warm = false; }

const QpSettings& QpSolver::settings() const { return impl_->st; }

QpSolver::Result QpSolver::solve(const Vec& q, const Vec& lo, const Vec& hi) {
  Impl& im = *impl_;
  const int n = im.n, m = im.m;
  if (q.size() != n || lo.size() != m || hi.size() != m)
    throw InvalidInput("QpSolver::solve: vector size mismatch");

  if (m == 0) {
    // unconstrained: P x = -q (P made definite by tiny shift)
    SpMat Preg = im.P;
    std::vector<Triplet> tr;
    for (int i = 0; i < n; ++i) tr.emplace_back(i, i, 1e-12);
    SpMat shift(n, n);
    shift.setFromTriplets(tr.begin(), tr.end());
    Preg = Preg + shift;
    Eigen::SimplicialLDLT<SpMat> f(Preg);
    Result res;
    res.x = f.solve(-q);
    res.y = Vec();
    res.status = inf_norm(Vec(im.P * res.x + q)) <= im.st.tol ? QpStatus::Solved : QpStatus::DualInfeasible;
    return res;
  }

  std::vector<char> eq(m);
  for (int r = 0; r < m; ++r) eq[r] = (lo[r] == hi[r]);
  bool need_factor = !im.pattern_ready;
  if (im.eq_row != eq) {
    im.eq_row = eq;
    im.init_rho(eq, im.st.rho0);
    need_factor = true;
  }
  if (need_factor) im.build_kkt();

  const Vec qs = im.cost_scale * im.D.cwiseProduct(q);
  Vec los(m), his(m);
  for (int r = 0; r < m; ++r) {
    los[r] = std::isfinite(lo[r]) ? lo[r] * im.E[r] : lo[r];
    his[r] = std::isfinite(hi[r]) ? hi[r] * im.E[r] : hi[r];
  }

  Vec xs = im.warm ? im.xs : Vec::Zero(n);
  Vec zs = im.warm ? im.zs : Vec::Zero(m);
  Vec ys = im.warm ? im.ys : Vec::Zero(m);
  for (int r = 0; r < m; ++r) zs[r] = clampd(zs[r], los[r], his[r]);

  const double alpha = im.st.alpha;
  double eps = std::max(im.st.tol * 0.1, 1e-10);
  int iter = 0;
  Vec prev_xs = xs, prev_ys = ys;
  Result best;
  double best_metric = kInf;
  int refactor_count = 0;

  auto consider = [&](const Vec& x, const Vec& y, QpStatus stat, double metric) {
    if (metric < best_metric) {
      best_metric = metric;
      best.x = x;
      best.y = y;
      best.status = stat;
    }
  };

  auto polish = [&](const Vec& xs_in, const Vec& ys_in) -> bool {
    std::vector<int> act;
    std::vector<double> act_rhs;
    for (int r = 0; r < m; ++r) {
      if (im.eq_row[r]) {
        act.push_back(r);
        act_rhs.push_back(los[r]);
      } else if (ys_in[r] > 1e-10 && std::isfinite(his[r])) {
        act.push_back(r);
        act_rhs.push_back(his[r]);
      } else if (ys_in[r] < -1e-10 && std::isfinite(los[r])) {
        act.push_back(r);
        act_rhs.push_back(los[r]);
      }
    }
    const int ma = (int)act.size();
    const double delta = 1e-9;
    std::vector<Triplet> tr, tr0;
    for (int k = 0; k < im.Ps.outerSize(); ++k)
      for (SpMat::InnerIterator it(im.Ps, k); it; ++it)
        if (it.row() <= it.col()) {
          tr.emplace_back((int)it.row(), (int)it.col(), it.value());
          tr0.emplace_back((int)it.row(), (int)it.col(), it.value());
        }
    for (int i = 0; i < n; ++i) tr.emplace_back(i, i, delta);
    std::vector<int> row_of(m, -1);
    for (int a = 0; a < ma; ++a) row_of[act[a]] = a;
    for (int k = 0; k < im.Cs.outerSize(); ++k)
      for (SpMat::InnerIterator it(im.Cs, k); it; ++it) {
        int a = row_of[it.row()];
        if (a >= 0) {
          tr.emplace_back((int)it.col(), n + a, it.value());
          tr0.emplace_back((int)it.col(), n + a, it.value());
        }
      }
    for (int a = 0; a < ma; ++a) tr.emplace_back(n + a, n + a, -delta);
    SpMat Ka(n + ma, n + ma), K0(n + ma, n + ma);
    Ka.setFromTriplets(tr.begin(), tr.end());
    K0.setFromTriplets(tr0.begin(), tr0.end());
    Eigen::SimplicialLDLT<SpMat, Eigen::Upper> f(Ka);
    if (f.info() != Eigen::Success) return false;
    Vec rhs(n + ma);
    rhs.head(n) = -qs;
    for (int a = 0; a < ma; ++a) rhs[n + a] = act_rhs[a];
    Vec sol = f.solve(rhs);
    for (int refine = 0; refine < 3; ++refine) {
      Vec resid = rhs - SpMat(K0.selfadjointView<Eigen::Upper>()) * sol;
      sol += f.solve(resid);
    }
    Vec pxs = sol.head(n);
    Vec pys = Vec::Zero(m);
    for (int a = 0; a < ma; ++a) pys[act[a]] = sol[n + a];
    Vec pzs = im.Cs * pxs;
    for (int r = 0; r < m; ++r)
      if (row_of[r] < 0) pzs[r] = clampd(pzs[r], los[r], his[r]);
    // sign sanity on inequality duals; a wrong-signed active dual means a
    // wrong active set, keep the splitting solution in that case
    for (int a = 0; a < ma; ++a) {
      int r = act[a];
      if (im.eq_row[r]) continue;
      if (act_rhs[a] == his[r] && pys[r] < -1e-8) return false;
      if (act_rhs[a] == los[r] && pys[r] > 1e-8) return false;
    }
    auto u = im.unscale(pxs, pys, pzs, q);
    // feasibility of inactive rows
    double viol = 0;
    Vec Cx = im.C * u.x;
    for (int r = 0; r < m; ++r) {
      double lo_u = lo[r], hi_u = hi[r];
      if (std::isfinite(hi_u)) viol = std::max(viol, Cx[r] - hi_u);
      if (std::isfinite(lo_u)) viol = std::max(viol, lo_u - Cx[r]);
    }
    double metric = std::max({u.rd, viol});
    consider(u.x, u.y, QpStatus::Solved, metric);
    return metric <= im.st.tol;
  };

  QpStatus verdict = QpStatus::MaxIter;
  bool done = false;
  while (!done && iter < im.st.max_iter) {
    // splitting step
    Vec rhs(n + m);
    rhs.head(n) = im.st.sigma * xs - qs;
    rhs.tail(m) = zs - ys.cwiseQuotient(im.rho);
    Vec sol = im.ldlt.solve(rhs);
    Vec xt = sol.head(n);
    Vec v = sol.tail(m);
    Vec zt = zs + (v - ys).cwiseQuotient(im.rho);
    Vec xs_new = alpha * xt + (1.0 - alpha) * xs;
    Vec w = alpha * zt + (1.0 - alpha) * zs + ys.cwiseQuotient(im.rho);
    Vec zs_new(m);
    for (int r = 0; r < m; ++r) zs_new[r] = clampd(w[r], los[r], his[r]);
    Vec ys_new = im.rho.cwiseProduct(w - zs_new);
    prev_xs = xs;
    prev_ys = ys;
    xs = xs_new;
    zs = zs_new;
    ys = ys_new;
    ++iter;

    if (iter % im.st.check_every != 0 && iter != im.st.max_iter) continue;

    auto u = im.unscale(xs, ys, zs, q);
    Vec Cx = im.C * u.x;
    double sp = std::max(inf_norm(Cx), inf_norm(u.z));
    Vec rdv = im.P * u.x + q + im.Ct * u.y;
    double sd = std::max({inf_norm(Vec(im.P * u.x)), inf_norm(q), inf_norm(Vec(im.Ct * u.y))});
    double ep = eps + eps * sp, ed = eps + eps * sd;
    consider(u.x, u.y, QpStatus::MaxIter, std::max(u.rp, u.rd));

    // infeasibility certificates from one-step deltas
    Vec dys = ys - prev_ys;
    Vec dy = im.E.cwiseProduct(dys) / im.cost_scale;
    double ndy = inf_norm(dy);
    if (ndy > 1e-12) {
      double eps_inf = 1e-6 * ndy;
      if (inf_norm(Vec(im.Ct * dy)) <= eps_inf) {
        double support = 0;
        bool ok = true;
        for (int r = 0; r < m && ok; ++r) {
          double p = std::max(dy[r], 0.0), nn = std::min(dy[r], 0.0);
          if (p > 0) {
            if (std::isfinite(hi[r])) support += hi[r] * p;
            else if (p > eps_inf) ok = false;
          }
          if (nn < 0) {
            if (std::isfinite(lo[r])) support += lo[r] * nn;
            else if (-nn > eps_inf) ok = false;
          }
        }
        if (ok && support <= -eps_inf) {
          verdict = QpStatus::PrimalInfeasible;
          best.status = verdict;
          done = true;
          break;
        }
      }
    }
    Vec dxs = xs - prev_xs;
    Vec dx = im.D.cwiseProduct(dxs);
    double ndx = inf_norm(dx);
    if (ndx > 1e-12) {
      double eps_inf = 1e-6 * ndx;
      if (inf_norm(Vec(im.P * dx)) <= eps_inf && q.dot(dx) <= -eps_inf) {
        Vec Cdx = im.C * dx;
        bool ok = true;
        for (int r = 0; r < m && ok; ++r) {
          if (std::isfinite(hi[r]) && std::isfinite(lo[r])) ok = std::abs(Cdx[r]) <= eps_inf;
          else if (std::isfinite(hi[r])) ok = Cdx[r] <= eps_inf;
          else if (std::isfinite(lo[r])) ok = Cdx[r] >= -eps_inf;
        }
        if (ok) {
          verdict = QpStatus::DualInfeasible;
          best.status = verdict;
          done = true;
          break;
        }
      }
    }

    if (u.rp <= ep && u.rd <= ed) {
      if (im.st.polish && polish(xs, ys)) {
        verdict = QpStatus::Solved;
        done = true;
        break;
      }
      if (std::max(u.rp, u.rd) <= im.st.tol) {
        verdict = QpStatus::Solved;
        done = true;
        break;
      }
      eps *= 0.1;  // polish rejected: tighten and keep iterating
      if (eps < 1e-12) eps = 1e-12;
    }

    if (im.st.adaptive_rho && refactor_count < 50 && iter < im.st.max_iter) {
      double rp_rel = u.rp / std::max(1e-12, sp > 0 ? sp : 1.0);
      double rd_rel = u.rd / std::max(1e-12, sd > 0 ? sd : 1.0);
      if (rp_rel > 1e-14 && rd_rel > 1e-14) {
        double ratio = std::sqrt(rp_rel / rd_rel);
        if (ratio > 5.0 || ratio < 0.2) {
          double base = clampd(im.rho[0] * ratio, 1e-6, 1e6);
          for (int r = 0; r < m; ++r) im.rho[r] = im.eq_row[r] ? base * 1e3 : base;
          im.build_kkt();
          ++refactor_count;
        }
      }
    }
  }

  if (!done && im.st.polish) polish(xs, ys);  // last chance at max_iter

  im.xs = xs;
  im.zs = zs;
  im.ys = ys;
  im.warm = true;

  if (best.x.size() == 0) {
    auto u = im.unscale(xs, ys, zs, q);
    best.x = u.x;
    best.y = u.y;
  }
  if (verdict == QpStatus::Solved || verdict == QpStatus::PrimalInfeasible ||
      verdict == QpStatus::DualInfeasible)
    best.status = verdict;
  else
    best.status = best_metric <= im.st.tol ? QpStatus::Solved : QpStatus::MaxIter;
  best.iterations = iter;
  return best;
}

QpSolution solve_qp(const QpProblem& p, double tol, int max_iter) {
  p.validate();
  const int n = (int)p.num_vars();
  const int mi = (int)p.A.rows(), me = (int)p.Aeq.rows();
  std::vector<Triplet> tr;
  for (int k = 0; k < p.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(p.A, k); it; ++it)
      tr.emplace_back((int)it.row(), (int)it.col(), it.value());
  for (int k = 0; k < p.Aeq.outerSize(); ++k)
    for (SpMat::InnerIterator it(p.Aeq, k); it; ++it)
      tr.emplace_back(mi + (int)it.row(), (int)it.col(), it.value());
  SpMat C(mi + me, n);
  C.setFromTriplets(tr.begin(), tr.end());
  Vec lo(mi + me), hi(mi + me);
  for (int r = 0; r < mi; ++r) {
    lo[r] = -kInf;
    hi[r] = p.b[r];
  }
  for (int r = 0; r < me; ++r) {
    lo[mi + r] = p.beq[r];
    hi[mi + r] = p.beq[r];
  }
  QpSettings st;
  st.tol = tol;
  st.max_iter = max_iter;
  QpSolver solver(p.H, C, st);
  auto res = solver.solve(p.g, lo, hi);

  QpSolution sol;
  sol.x = res.x;
  sol.status = res.status;
  sol.iterations = res.iterations;
  sol.mu = Vec::Zero(mi);
  sol.nu = Vec::Zero(me);
  if (res.y.size() == mi + me) {
    for (int r = 0; r < mi; ++r) sol.mu[r] = std::max(res.y[r], 0.0);
    for (int r = 0; r < me; ++r) sol.nu[r] = res.y[mi + r];
  }
  sol.residuals = kkt_residuals(p, sol);
  sol.objective = 0.5 * sol.x.dot(p.H * sol.x) + p.g.dot(sol.x);
  if (sol.status == QpStatus::Solved) {
    double comp_tol = tol * (1.0 + (p.b.size() ? inf_norm(p.b) : 0.0));
    bool ok = sol.residuals.stationarity <= tol && sol.residuals.primal <= tol &&
              sol.residuals.dual_sign <= tol && sol.residuals.complementarity <= comp_tol;
    if (!ok) sol.status = QpStatus::MaxIter;
  }
  return sol;
}

QpResiduals kkt_residuals(const QpProblem& p, const QpSolution& sol) {
  QpResiduals r;
  if (sol.x.size() != p.num_vars()) throw InvalidInput("kkt_residuals: x size mismatch");
  Vec stat = p.H * sol.x + p.g;
  if (p.A.rows() > 0) stat += p.A.transpose() * sol.mu;
  if (p.Aeq.rows() > 0) stat += p.Aeq.transpose() * sol.nu;
  r.stationarity = inf_norm(stat);
  double prim = 0;
  if (p.A.rows() > 0) {
    Vec s = p.A * sol.x - p.b;
    prim = std::max(prim, s.maxCoeff());
    r.complementarity = std::abs(sol.mu.dot(s));
    r.dual_sign = std::max(0.0, -sol.mu.minCoeff());
  }
  if (p.Aeq.rows() > 0) prim = std::max(prim, inf_norm(Vec(p.Aeq * sol.x - p.beq)));
  r.primal = std::max(prim, 0.0);
  return r;
}

namespace {
void dump_sparse(const SpMat& M, const char* tag, std::ostream& os) {
  os << tag << " " << M.rows() << " " << M.cols() << " " << M.nonZeros() << "\n";
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      os << it.row() << " " << it.col() << " " << std::setprecision(17) << it.value() << "\n";
}
void dump_vec(const Vec& v, const char* tag, std::ostream& os) {
  os << tag << " " << v.size() << "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << std::setprecision(17) << v[i] << "\n";
}
SpMat read_sparse(std::istream& is, const char* tag) {
  std::string t;
  long rows, cols, nnz;
  is >> t >> rows >> cols >> nnz;
  if (t != tag) throw InvalidInput("qp load: expected section " + std::string(tag));
  std::vector<Triplet> tr;
  tr.reserve(nnz);
  for (long k = 0; k < nnz; ++k) {
    long i, j;
    double v;
    is >> i >> j >> v;
    tr.emplace_back((int)i, (int)j, v);
  }
  SpMat M(rows, cols);
  M.setFromTriplets(tr.begin(), tr.end());
  return M;
}
Vec read_vec(std::istream& is, const char* tag) {
  std::string t;
  long sz;
  is >> t >> sz;
  if (t != tag) throw InvalidInput("qp load: expected section " + std::string(tag));
  Vec v(sz);
  for (long i = 0; i < sz; ++i) is >> v[i];
  return v;
}
}  // namespace

void dump_problem(const QpProblem& p, std::ostream& os) {
  os << "qp 1\n";
  dump_sparse(p.H, "H", os);
  dump_vec(p.g, "g", os);
  dump_sparse(p.A, "A", os);
  dump_vec(p.b, "b", os);
  dump_sparse(p.Aeq, "Aeq", os);
  dump_vec(p.beq, "beq", os);
}

QpProblem load_problem(std::istream& is) {
  std::string magic;
  int ver;
  is >> magic >> ver;
  if (magic != "qp" || ver != 1) throw InvalidInput("qp load: bad header");
  QpProblem p;
  p.H = read_sparse(is, "H");
  p.g = read_vec(is, "g");
  p.A = read_sparse(is, "A");
  p.b = read_vec(is, "b");
  p.Aeq = read_sparse(is, "Aeq");
  p.beq = read_vec(is, "beq");
  if (!is) throw InvalidInput("qp load: truncated input");
  return p;
}

}  // namespace sesm
