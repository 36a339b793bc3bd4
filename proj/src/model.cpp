// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0

#include "sesm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sesm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void fail(const std::string& field, const std::string& what) {
  throw ScenarioInvariantError(field + ": " + what);
}
}  // namespace

ScenarioFlags case_flags(int case_id) {
  switch (case_id) {
    case 1: return {false, false};
    case 2: return {true, false};
    case 3: return {false, true};
    case 4: return {true, true};
  }
  throw InvalidInput("case id must be 1..4");
}

void Scenario::validate() const {
  const int T = horizon.T;
  if (T < 1) fail("horizon.T", "must be >= 1");
  if (!(horizon.dt > 0)) fail("horizon.dt", "must be positive");
  const int N = num_prosumers();
  if (N < 1) fail("prosumers", "need at least one prosumer");
  if ((int)tariffs.buy.size() != T) fail("tariffs.buy", "length != T");
  if ((int)tariffs.sell.size() != T) fail("tariffs.sell", "length != T");
  for (int t = 0; t < T; ++t) {
    if (tariffs.sell[t] < 0) fail("tariffs.sell", "negative at period " + std::to_string(t));
    if (!(tariffs.buy[t] > tariffs.sell[t]))
      fail("tariffs", "buy must exceed sell at period " + std::to_string(t));
  }
  if (tariffs.theta0 < 0 || tariffs.theta1 < 0) fail("tariffs.theta", "must be nonnegative");
  for (int i = 0; i < N; ++i) {
    const auto& p = prosumers[i];
    const std::string pre = "prosumers[" + std::to_string(i) + "]";
    if ((int)p.load.size() != T) fail(pre + ".load", "length != T");
    if ((int)p.dg.size() != T) fail(pre + ".dg", "length != T");
    for (int t = 0; t < T; ++t) {
      if (p.load[t] < 0) fail(pre + ".load", "negative at period " + std::to_string(t));
      if (p.dg[t] < 0) fail(pre + ".dg", "negative at period " + std::to_string(t));
    }
    if (p.alpha_sh < 0 || p.alpha_sh > 1) fail(pre + ".alpha_sh", "must lie in [0,1]");
    if (!(p.lambda_sh > 0)) fail(pre + ".lambda_sh", "must be positive");
    if (p.lambda_tr_ses < 0) fail(pre + ".lambda_tr_ses", "must be nonnegative");
    if (p.ess) {
      const auto& e = *p.ess;
      if (!(e.eta > 0 && e.eta <= 1)) fail(pre + ".ess.eta", "must lie in (0,1]");
      if (e.p_max < 0 || e.s_max < 0) fail(pre + ".ess", "capacities must be nonnegative");
      if (!(0 <= e.soc_min && e.soc_min <= e.soc0 && e.soc0 <= e.soc_max && e.soc_max <= 1))
        fail(pre + ".ess.soc", "need 0 <= soc_min <= soc0 <= soc_max <= 1");
      if (e.lambda_u < 0) fail(pre + ".ess.lambda_u", "must be nonnegative");
    }
  }
  if (ses.p_cap < 0 || ses.s_cap < 0) fail("ses", "capacities must be nonnegative");
  if (!(ses.eta > 0 && ses.eta <= 1)) fail("ses.eta", "must lie in (0,1]");
  if (!(0 <= ses.soc_min && ses.soc_min <= ses.soc0 && ses.soc0 <= ses.soc_max &&
        ses.soc_max <= 1))
    fail("ses.soc", "need 0 <= soc_min <= soc0 <= soc_max <= 1");
  if (ses.lambda_u < 0) fail("ses.lambda_u", "must be nonnegative");
  if (ses.b_s < 0 || ses.b_p < 0) fail("ses.price", "slope coefficients must be nonnegative");
  if (network.impedance.rows() != N || network.impedance.cols() != N)
    fail("network.impedance", "must be N x N");
  for (int i = 0; i < N; ++i) {
    if (network.impedance(i, i) != 0.0) fail("network.impedance", "diagonal must be zero");
    for (int j = 0; j < N; ++j)
      if (std::abs(network.impedance(i, j) - network.impedance(j, i)) > 1e-12)
        fail("network.impedance", "must be symmetric");
  }
}

ProsumerDecision ProsumerDecision::zero(int n_prosumers, int T) {
  ProsumerDecision d;
  d.ess_ch.assign(T, 0.0);
  d.ess_dis.assign(T, 0.0);
  d.ses_ch.assign(T, 0.0);
  d.ses_dis.assign(T, 0.0);
  d.buy.assign(T, 0.0);
  d.sell.assign(T, 0.0);
  d.shift.assign(T, 0.0);
  d.p2p = Eigen::MatrixXd::Zero(n_prosumers, T);
  d.p2p_pos = Eigen::MatrixXd::Zero(n_prosumers, T);
  return d;
}

double net_load(const ProsumerParams& p, const ProsumerDecision& d, int t) {
  if (t < 0 || t >= (int)p.load.size()) throw InvalidInput("net_load: period out of range");
  double ch = t < (int)d.ess_ch.size() ? d.ess_ch[t] : 0.0;
  double dis = t < (int)d.ess_dis.size() ? d.ess_dis[t] : 0.0;
  return p.load[t] + ch - dis - p.dg[t] + d.shift[t];
}

double transmission_price(double theta1, double theta0, double x_ij) {
  if (theta1 < 0 || theta0 < 0) throw InvalidInput("transmission_price: negative coefficient");
  return theta1 * std::abs(x_ij) + theta0;
}

double p2p_price(const Tariffs& tariffs, int t) {
  if (t < 0 || t >= (int)tariffs.buy.size()) throw InvalidInput("p2p_price: period out of range");
  if (!(tariffs.buy[t] > tariffs.sell[t]))
    throw InvalidInput("p2p_price: buy price must exceed sell price");
  return 0.5 * (tariffs.buy[t] + tariffs.sell[t]);
}

double p2p_fee(const Scenario& s, int i, int j) {
  return transmission_price(s.tariffs.theta1, s.tariffs.theta0, s.network.impedance(i, j));
}

std::pair<double, double> capacity_prices(const SharedEssParams& ses,
                                          const std::vector<ProsumerDecision>& all) {
  double sum_s = 0, sum_p = 0;
  for (const auto& d : all) {
    sum_s += d.ses_s_max;
    sum_p += d.ses_p_max;
  }
  return {ses.a_s + ses.b_s * sum_s, ses.a_p + ses.b_p * sum_p};
}

CostBreakdown cost_local(const Scenario& s, int i, const ProsumerDecision& d) {
  const int T = s.periods();
  const int N = s.num_prosumers();
  const double dt = s.horizon.dt;
  const auto& p = s.prosumers[i];
  if ((int)d.buy.size() != T || d.p2p.rows() != N || d.p2p.cols() != T)
    throw InvalidInput("cost_local: decision dimensions inconsistent with scenario");
  CostBreakdown c;
  for (int t = 0; t < T; ++t) {
    c.c_g += (s.tariffs.buy[t] * d.buy[t] - s.tariffs.sell[t] * d.sell[t]) * dt;
    double pp = p2p_price(s.tariffs, t);
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      c.c_p2p += pp * d.p2p(j, t) * dt;
      c.c_tr += p2p_fee(s, i, j) * d.p2p_pos(j, t) * dt;
    }
    c.c_ses_use += s.ses.lambda_u * (d.ses_ch[t] + d.ses_dis[t]) * dt;
    c.c_ses_tr += p.lambda_tr_ses * (d.ses_ch[t] + d.ses_dis[t]) * dt;
    if (p.ess) c.c_es += p.ess->lambda_u * (d.ess_ch[t] + d.ess_dis[t]) * dt;
    c.c_sh += p.lambda_sh * d.shift[t] * d.shift[t] * dt;
  }
  c.refresh_total();
  return c;
}

double cost_rent(const SharedEssParams& ses, const ProsumerDecision& d_i,
                 const std::vector<ProsumerDecision>& all) {
  auto [ls, lp] = capacity_prices(ses, all);
  return ls * d_i.ses_s_max + lp * d_i.ses_p_max;
}

std::vector<double> ess_energy_series(const PrivateEssParams& e, const ProsumerDecision& d,
                                      const Horizon& h) {
  std::vector<double> series(h.T + 1);
  series[0] = e.soc0 * e.s_max;
  for (int t = 0; t < h.T; ++t)
    series[t + 1] = series[t] + (e.eta * d.ess_ch[t] - d.ess_dis[t] / e.eta) * h.dt;
  return series;
}

std::vector<double> ses_energy_series(const SharedEssParams& ses, const ProsumerDecision& d,
                                      const Horizon& h) {
  std::vector<double> series(h.T + 1);
  series[0] = ses.soc0 * d.ses_s_max;
  for (int t = 0; t < h.T; ++t)
    series[t + 1] = series[t] + (ses.eta * d.ses_ch[t] - d.ses_dis[t] / ses.eta) * h.dt;
  return series;
}

const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::EssChargeLimit: return "ess_charge_limit";
    case ConstraintKind::EssDischargeLimit: return "ess_discharge_limit";
    case ConstraintKind::EssEnergyLower: return "ess_energy_lower";
    case ConstraintKind::EssEnergyUpper: return "ess_energy_upper";
    case ConstraintKind::EssTerminalEnergy: return "ess_terminal_energy";
    case ConstraintKind::ShiftBound: return "shift_bound";
    case ConstraintKind::ShiftBalance: return "shift_balance";
    case ConstraintKind::SesChargeNonneg: return "ses_charge_nonneg";
    case ConstraintKind::SesDischargeNonneg: return "ses_discharge_nonneg";
    case ConstraintKind::SesChargeLimit: return "ses_charge_limit";
    case ConstraintKind::SesDischargeLimit: return "ses_discharge_limit";
    case ConstraintKind::SesEnergyLower: return "ses_energy_lower";
    case ConstraintKind::SesEnergyUpper: return "ses_energy_upper";
    case ConstraintKind::SesTerminalEnergy: return "ses_terminal_energy";
    case ConstraintKind::SesPowerCapNonneg: return "ses_power_cap_nonneg";
    case ConstraintKind::SesStorageCapNonneg: return "ses_storage_cap_nonneg";
    case ConstraintKind::BuyNonneg: return "buy_nonneg";
    case ConstraintKind::SellNonneg: return "sell_nonneg";
    case ConstraintKind::PowerBalance: return "power_balance";
    case ConstraintKind::TradePosNonneg: return "trade_pos_nonneg";
    case ConstraintKind::TradePosCover: return "trade_pos_cover";
    case ConstraintKind::SelfTradeZero: return "self_trade_zero";
    case ConstraintKind::TradeDisabled: return "trade_disabled";
    case ConstraintKind::SesDisabled: return "ses_disabled";
    case ConstraintKind::TradeAntisymmetry: return "trade_antisymmetry";
    case ConstraintKind::SesPowerCap: return "ses_power_cap";
    case ConstraintKind::SesStorageCap: return "ses_storage_cap";
  }
  return "unknown";
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  if (prosumer >= 0) os << " prosumer=" << prosumer;
  if (period >= 0) os << " period=" << period;
  if (counterparty >= 0) os << " peer=" << counterparty;
  os << " residual=" << residual;
  return os.str();
}

namespace {

struct ViolationSink {
  std::vector<Violation>& out;
  int prosumer;
  double tol;
  void check(ConstraintKind kind, double residual, int t = -1, int j = -1) {
    if (residual > tol) out.push_back({kind, prosumer, t, j, residual});
  }
};

}  // namespace

std::vector<Violation> check_local_feasibility(const Scenario& s, int i,
                                               const ProsumerDecision& d, double tol) {
  if (tol < 0) throw InvalidInput("check_local_feasibility: tol must be nonnegative");
  const int T = s.periods();
  const int N = s.num_prosumers();
  const double dt = s.horizon.dt;
  const auto& p = s.prosumers[i];
  std::vector<Violation> out;
  ViolationSink v{out, i, tol};

  if (p.ess) {
    const auto& e = *p.ess;
    double cum = 0;
    for (int t = 0; t < T; ++t) {
      v.check(ConstraintKind::EssChargeLimit,
              std::max(-d.ess_ch[t], d.ess_ch[t] - e.p_max), t);
      v.check(ConstraintKind::EssDischargeLimit,
              std::max(-d.ess_dis[t], d.ess_dis[t] - e.p_max), t);
      cum += (e.eta * d.ess_ch[t] - d.ess_dis[t] / e.eta) * dt;
      v.check(ConstraintKind::EssEnergyLower, (e.soc_min - e.soc0) * e.s_max - cum, t);
      v.check(ConstraintKind::EssEnergyUpper, cum - (e.soc_max - e.soc0) * e.s_max, t);
    }
    if (s.private_ess_terminal_balance) v.check(ConstraintKind::EssTerminalEnergy, -cum, T - 1);
  } else {
    for (int t = 0; t < T; ++t) {
      v.check(ConstraintKind::EssChargeLimit, std::abs(d.ess_ch[t]), t);
      v.check(ConstraintKind::EssDischargeLimit, std::abs(d.ess_dis[t]), t);
    }
  }

  double shift_sum = 0;
  for (int t = 0; t < T; ++t) {
    double bound = p.alpha_sh * p.load[t];
    v.check(ConstraintKind::ShiftBound, std::abs(d.shift[t]) - bound, t);
    shift_sum += d.shift[t];
  }
  v.check(ConstraintKind::ShiftBalance, std::abs(shift_sum));

  {
    double cum = 0;
    const auto& e = s.ses;
    for (int t = 0; t < T; ++t) {
      v.check(ConstraintKind::SesChargeNonneg, -d.ses_ch[t], t);
      v.check(ConstraintKind::SesDischargeNonneg, -d.ses_dis[t], t);
      v.check(ConstraintKind::SesChargeLimit, d.ses_ch[t] - d.ses_p_max, t);
      v.check(ConstraintKind::SesDischargeLimit, d.ses_dis[t] - d.ses_p_max, t);
      cum += (e.eta * d.ses_ch[t] - d.ses_dis[t] / e.eta) * dt;
      v.check(ConstraintKind::SesEnergyLower, (e.soc_min - e.soc0) * d.ses_s_max - cum, t);
      v.check(ConstraintKind::SesEnergyUpper, cum - (e.soc_max - e.soc0) * d.ses_s_max, t);
    }
    v.check(ConstraintKind::SesTerminalEnergy, -cum, T - 1);
    v.check(ConstraintKind::SesPowerCapNonneg, -d.ses_p_max);
    v.check(ConstraintKind::SesStorageCapNonneg, -d.ses_s_max);
    if (!s.flags.ses_enabled) {
      v.check(ConstraintKind::SesDisabled, std::abs(d.ses_p_max));
      v.check(ConstraintKind::SesDisabled, std::abs(d.ses_s_max));
    }
  }

  for (int t = 0; t < T; ++t) {
    v.check(ConstraintKind::BuyNonneg, -d.buy[t], t);
    v.check(ConstraintKind::SellNonneg, -d.sell[t], t);
    double sum_p2p = 0;
    for (int j = 0; j < N; ++j)
      if (j != i) sum_p2p += d.p2p(j, t);
    double lhs = net_load(p, d, t) - sum_p2p - d.buy[t] - d.ses_dis[t] + d.sell[t] + d.ses_ch[t];
    v.check(ConstraintKind::PowerBalance, std::abs(lhs), t);
  }

  for (int j = 0; j < N; ++j) {
    for (int t = 0; t < T; ++t) {
      if (j == i) {
        v.check(ConstraintKind::SelfTradeZero, std::abs(d.p2p(j, t)), t, j);
        v.check(ConstraintKind::SelfTradeZero, std::abs(d.p2p_pos(j, t)), t, j);
        continue;
      }
      v.check(ConstraintKind::TradePosNonneg, -d.p2p_pos(j, t), t, j);
      v.check(ConstraintKind::TradePosCover, d.p2p(j, t) - d.p2p_pos(j, t), t, j);
      if (!s.flags.p2p_enabled) {
        v.check(ConstraintKind::TradeDisabled, std::abs(d.p2p(j, t)), t, j);
        v.check(ConstraintKind::TradeDisabled, std::abs(d.p2p_pos(j, t)), t, j);
      }
    }
  }
  return out;
}

std::vector<Violation> check_coupled_feasibility(const Scenario& s,
                                                 const std::vector<ProsumerDecision>& all,
                                                 double tol) {
  if (tol < 0) throw InvalidInput("check_coupled_feasibility: tol must be nonnegative");
  const int T = s.periods();
  const int N = s.num_prosumers();
  if ((int)all.size() != N) throw InvalidInput("check_coupled_feasibility: wrong profile count");
  std::vector<Violation> out;
  for (int a = 0; a < N; ++a)
    for (int b = a + 1; b < N; ++b)
      for (int t = 0; t < T; ++t) {
        double r = std::abs(all[a].p2p(b, t) + all[b].p2p(a, t));
        if (r > tol) out.push_back({ConstraintKind::TradeAntisymmetry, a, t, b, r});
      }
  double sp = 0, ss = 0;
  for (const auto& d : all) {
    sp += d.ses_p_max;
    ss += d.ses_s_max;
  }
  if (sp - s.ses.p_cap > tol)
    out.push_back({ConstraintKind::SesPowerCap, -1, -1, -1, sp - s.ses.p_cap});
  if (ss - s.ses.s_cap > tol)
    out.push_back({ConstraintKind::SesStorageCap, -1, -1, -1, ss - s.ses.s_cap});
  return out;
}

Vec VarLayout::pack(const ProsumerDecision& d) const {
  Vec x = Vec::Zero(size());
  for (int t = 0; t < T_; ++t) {
    x[ess_ch(t)] = d.ess_ch[t];
    x[ess_dis(t)] = d.ess_dis[t];
    x[ses_ch(t)] = d.ses_ch[t];
    x[ses_dis(t)] = d.ses_dis[t];
    x[buy(t)] = d.buy[t];
    x[sell(t)] = d.sell[t];
    x[shift(t)] = d.shift[t];
    for (int j = 0; j < n_; ++j) {
      x[p2p(j, t)] = d.p2p(j, t);
      x[p2p_pos(j, t)] = d.p2p_pos(j, t);
    }
  }
  x[ses_p_max()] = d.ses_p_max;
  x[ses_s_max()] = d.ses_s_max;
  return x;
}

ProsumerDecision VarLayout::unpack(const Vec& x) const {
  if (x.size() != size()) throw InvalidInput("VarLayout::unpack: size mismatch");
  ProsumerDecision d = ProsumerDecision::zero(n_, T_);
  for (int t = 0; t < T_; ++t) {
    d.ess_ch[t] = x[ess_ch(t)];
    d.ess_dis[t] = x[ess_dis(t)];
    d.ses_ch[t] = x[ses_ch(t)];
    d.ses_dis[t] = x[ses_dis(t)];
    d.buy[t] = x[buy(t)];
    d.sell[t] = x[sell(t)];
    d.shift[t] = x[shift(t)];
    for (int j = 0; j < n_; ++j) {
      d.p2p(j, t) = x[p2p(j, t)];
      d.p2p_pos(j, t) = x[p2p_pos(j, t)];
    }
  }
  d.ses_p_max = x[ses_p_max()];
  d.ses_s_max = x[ses_s_max()];
  return d;
}

SpMat RowBlock::matrix() const {
  SpMat M(rows(), cols);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

namespace {

struct RowBuilder {
  RowBlock& b;
  int row = 0;
  void add(std::initializer_list<std::pair<int, double>> coeffs, double lo, double hi,
           RowInfo info) {
    for (auto& [c, v] : coeffs) b.trips.emplace_back(row, c, v);
    b.lo.push_back(lo);
    b.hi.push_back(hi);
    b.info.push_back(info);
    ++row;
  }
  void add_vec(const std::vector<std::pair<int, double>>& coeffs, double lo, double hi,
               RowInfo info) {
    for (auto& [c, v] : coeffs) b.trips.emplace_back(row, c, v);
    b.lo.push_back(lo);
    b.hi.push_back(hi);
    b.info.push_back(info);
    ++row;
  }
};

}  // namespace

RowBlock local_rows(const Scenario& s, int i) {
  const int T = s.periods();
  const int N = s.num_prosumers();
  const double dt = s.horizon.dt;
  const auto& p = s.prosumers[i];
  VarLayout L(N, T);
  RowBlock block;
  block.cols = L.size();
  RowBuilder rb{block};

  if (p.ess) {
    const auto& e = *p.ess;
    for (int t = 0; t < T; ++t) {
      rb.add({{L.ess_ch(t), 1.0}}, 0.0, e.p_max, {ConstraintKind::EssChargeLimit, t});
      rb.add({{L.ess_dis(t), 1.0}}, 0.0, e.p_max, {ConstraintKind::EssDischargeLimit, t});
    }
    for (int t = 0; t < T; ++t) {
      std::vector<std::pair<int, double>> low, up;
      for (int u = 0; u <= t; ++u) {
        low.emplace_back(L.ess_ch(u), -e.eta * dt);
        low.emplace_back(L.ess_dis(u), dt / e.eta);
        up.emplace_back(L.ess_ch(u), e.eta * dt);
        up.emplace_back(L.ess_dis(u), -dt / e.eta);
      }
      rb.add_vec(low, -kInf, -(e.soc_min - e.soc0) * e.s_max, {ConstraintKind::EssEnergyLower, t});
      rb.add_vec(up, -kInf, (e.soc_max - e.soc0) * e.s_max, {ConstraintKind::EssEnergyUpper, t});
    }
    if (s.private_ess_terminal_balance) {
      std::vector<std::pair<int, double>> row;
      for (int u = 0; u < T; ++u) {
        row.emplace_back(L.ess_ch(u), e.eta * dt);
        row.emplace_back(L.ess_dis(u), -dt / e.eta);
      }
      rb.add_vec(row, 0.0, kInf, {ConstraintKind::EssTerminalEnergy, T - 1});
    }
  } else {
    for (int t = 0; t < T; ++t) {
      rb.add({{L.ess_ch(t), 1.0}}, 0.0, 0.0, {ConstraintKind::EssChargeLimit, t});
      rb.add({{L.ess_dis(t), 1.0}}, 0.0, 0.0, {ConstraintKind::EssDischargeLimit, t});
    }
  }

  for (int t = 0; t < T; ++t) {
    double bound = p.alpha_sh * p.load[t];
    rb.add({{L.shift(t), 1.0}}, -bound, bound, {ConstraintKind::ShiftBound, t});
  }
  {
    std::vector<std::pair<int, double>> row;
    for (int t = 0; t < T; ++t) row.emplace_back(L.shift(t), 1.0);
    rb.add_vec(row, 0.0, 0.0, {ConstraintKind::ShiftBalance});
  }

  {
    const auto& e = s.ses;
    for (int t = 0; t < T; ++t) {
      rb.add({{L.ses_ch(t), 1.0}}, 0.0, kInf, {ConstraintKind::SesChargeNonneg, t});
      rb.add({{L.ses_dis(t), 1.0}}, 0.0, kInf, {ConstraintKind::SesDischargeNonneg, t});
      rb.add({{L.ses_ch(t), 1.0}, {L.ses_p_max(), -1.0}}, -kInf, 0.0,
             {ConstraintKind::SesChargeLimit, t});
      rb.add({{L.ses_dis(t), 1.0}, {L.ses_p_max(), -1.0}}, -kInf, 0.0,
             {ConstraintKind::SesDischargeLimit, t});
    }
    for (int t = 0; t < T; ++t) {
      // stored energy after period t, relative to the initial block level:
      // lower bound:  (soc_min - soc0) s - cum <= 0
      std::vector<std::pair<int, double>> low, up;
      for (int u = 0; u <= t; ++u) {
        low.emplace_back(L.ses_ch(u), -e.eta * dt);
        low.emplace_back(L.ses_dis(u), dt / e.eta);
        up.emplace_back(L.ses_ch(u), e.eta * dt);
        up.emplace_back(L.ses_dis(u), -dt / e.eta);
      }
      low.emplace_back(L.ses_s_max(), e.soc_min - e.soc0);
      up.emplace_back(L.ses_s_max(), -(e.soc_max - e.soc0));
      rb.add_vec(low, -kInf, 0.0, {ConstraintKind::SesEnergyLower, t});
      rb.add_vec(up, -kInf, 0.0, {ConstraintKind::SesEnergyUpper, t});
    }
    {
      std::vector<std::pair<int, double>> row;
      for (int u = 0; u < T; ++u) {
        row.emplace_back(L.ses_ch(u), e.eta * dt);
        row.emplace_back(L.ses_dis(u), -dt / e.eta);
      }
      rb.add_vec(row, 0.0, kInf, {ConstraintKind::SesTerminalEnergy, T - 1});
    }
    rb.add({{L.ses_p_max(), 1.0}}, 0.0, kInf, {ConstraintKind::SesPowerCapNonneg});
    rb.add({{L.ses_s_max(), 1.0}}, 0.0, kInf, {ConstraintKind::SesStorageCapNonneg});
    if (!s.flags.ses_enabled) {
      rb.add({{L.ses_p_max(), 1.0}}, 0.0, 0.0, {ConstraintKind::SesDisabled});
      rb.add({{L.ses_s_max(), 1.0}}, 0.0, 0.0, {ConstraintKind::SesDisabled});
    }
  }

  for (int t = 0; t < T; ++t) {
    rb.add({{L.buy(t), 1.0}}, 0.0, kInf, {ConstraintKind::BuyNonneg, t});
    rb.add({{L.sell(t), 1.0}}, 0.0, kInf, {ConstraintKind::SellNonneg, t});
  }

  for (int t = 0; t < T; ++t) {
    std::vector<std::pair<int, double>> row;
    row.emplace_back(L.ess_ch(t), 1.0);
    row.emplace_back(L.ess_dis(t), -1.0);
    row.emplace_back(L.shift(t), 1.0);
    row.emplace_back(L.buy(t), -1.0);
    row.emplace_back(L.sell(t), 1.0);
    row.emplace_back(L.ses_dis(t), -1.0);
    row.emplace_back(L.ses_ch(t), 1.0);
    for (int j = 0; j < N; ++j)
      if (j != i) row.emplace_back(L.p2p(j, t), -1.0);
    double rhs = p.dg[t] - p.load[t];
    rb.add_vec(row, rhs, rhs, {ConstraintKind::PowerBalance, t});
  }

  for (int j = 0; j < N; ++j) {
    for (int t = 0; t < T; ++t) {
      if (j == i) {
        rb.add({{L.p2p(j, t), 1.0}}, 0.0, 0.0, {ConstraintKind::SelfTradeZero, t, j});
        rb.add({{L.p2p_pos(j, t), 1.0}}, 0.0, 0.0, {ConstraintKind::SelfTradeZero, t, j});
        continue;
      }
      rb.add({{L.p2p_pos(j, t), 1.0}}, 0.0, kInf, {ConstraintKind::TradePosNonneg, t, j});
      rb.add({{L.p2p(j, t), 1.0}, {L.p2p_pos(j, t), -1.0}}, -kInf, 0.0,
             {ConstraintKind::TradePosCover, t, j});
      if (!s.flags.p2p_enabled) {
        rb.add({{L.p2p(j, t), 1.0}}, 0.0, 0.0, {ConstraintKind::TradeDisabled, t, j});
        rb.add({{L.p2p_pos(j, t), 1.0}}, 0.0, 0.0, {ConstraintKind::TradeDisabled, t, j});
      }
    }
  }
  return block;
}

RowBlock shared_rows_for(const Scenario& s, int i) {
  const int T = s.periods();
  const int N = s.num_prosumers();
  VarLayout L(N, T);
  RowBlock block;
  block.cols = L.size();
  RowBuilder rb{block};
  rb.add({{L.ses_p_max(), 1.0}}, -kInf, s.ses.p_cap, {ConstraintKind::SesPowerCap});
  rb.add({{L.ses_s_max(), 1.0}}, -kInf, s.ses.s_cap, {ConstraintKind::SesStorageCap});
  for (int a = 0; a < N; ++a)
    for (int b = a + 1; b < N; ++b)
      for (int t = 0; t < T; ++t) {
        std::vector<std::pair<int, double>> row;
        if (i == a) row.emplace_back(L.p2p(b, t), 1.0);
        if (i == b) row.emplace_back(L.p2p(a, t), 1.0);
        rb.add_vec(row, 0.0, 0.0, {ConstraintKind::TradeAntisymmetry, t, i == a ? b : a});
      }
  return block;
}

void local_cost_terms(const Scenario& s, int i, std::vector<Triplet>& h_trips, Vec& g) {
  const int T = s.periods();
  const int N = s.num_prosumers();
  const double dt = s.horizon.dt;
  const auto& p = s.prosumers[i];
  VarLayout L(N, T);
  g = Vec::Zero(L.size());
  for (int t = 0; t < T; ++t) {
    g[L.buy(t)] += s.tariffs.buy[t] * dt;
    g[L.sell(t)] -= s.tariffs.sell[t] * dt;
    double pp = p2p_price(s.tariffs, t);
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      g[L.p2p(j, t)] += pp * dt;
      g[L.p2p_pos(j, t)] += p2p_fee(s, i, j) * dt;
    }
    g[L.ses_ch(t)] += (s.ses.lambda_u + p.lambda_tr_ses) * dt;
    g[L.ses_dis(t)] += (s.ses.lambda_u + p.lambda_tr_ses) * dt;
    if (p.ess) {
      g[L.ess_ch(t)] += p.ess->lambda_u * dt;
      g[L.ess_dis(t)] += p.ess->lambda_u * dt;
    }
    h_trips.emplace_back(L.shift(t), L.shift(t), 2.0 * p.lambda_sh * dt);
  }
}

AffineForm assemble_affine_form(const Scenario& s, int i) {
  s.validate();
  AffineForm af;
  auto expand = [](const RowBlock& rb, SpMat& M, Vec& rhs,
                   std::vector<AffineForm::Origin>& origin, std::vector<RowInfo>& info) {
    SpMat cols = SpMat(rb.matrix().transpose());  // column per source row
    std::vector<Triplet> tr;
    std::vector<double> b;
    auto push_row = [&](int src, double sign, double bound, bool upper) {
      int r = (int)b.size();
      for (SpMat::InnerIterator it(cols, src); it; ++it)
        tr.emplace_back(r, (int)it.row(), sign * it.value());
      b.push_back(sign * bound);
      origin.push_back({src, upper});
      info.push_back(rb.info[src]);
    };
    for (int src = 0; src < rb.rows(); ++src) {
      double lo = rb.lo[src], hi = rb.hi[src];
      if (std::isfinite(hi)) push_row(src, 1.0, hi, true);
      if (std::isfinite(lo)) push_row(src, -1.0, lo, false);
    }
    M = SpMat((int)b.size(), rb.cols);
    M.setFromTriplets(tr.begin(), tr.end());
    rhs = Eigen::Map<Vec>(b.data(), (long)b.size());
  };
  RowBlock loc = local_rows(s, i);
  RowBlock shr = shared_rows_for(s, i);
  expand(loc, af.Aloc, af.bloc, af.loc_origin, af.loc_info);
  expand(shr, af.Eshr, af.f, af.shr_origin, af.shr_info);
  return af;
}

double social_objective(const Scenario& s, const std::vector<ProsumerDecision>& all) {
  const int N = s.num_prosumers();
  if ((int)all.size() != N) throw InvalidInput("social_objective: wrong profile count");
  double obj = 0, sum_s = 0, sum_p = 0, sq_s = 0, sq_p = 0;
  for (int i = 0; i < N; ++i) {
    obj += cost_local(s, i, all[i]).total;
    sum_s += all[i].ses_s_max;
    sum_p += all[i].ses_p_max;
    sq_s += all[i].ses_s_max * all[i].ses_s_max;
    sq_p += all[i].ses_p_max * all[i].ses_p_max;
  }
  obj += 0.5 * s.ses.b_s * sum_s * sum_s + s.ses.a_s * sum_s + 0.5 * s.ses.b_s * sq_s;
  obj += 0.5 * s.ses.b_p * sum_p * sum_p + s.ses.a_p * sum_p + 0.5 * s.ses.b_p * sq_p;
  return obj;
}

}  // namespace sesm
