// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "sesm/model.hpp"
#include "sesm/util.hpp"

namespace sesm_test {

// Small 3-prosumer, 4-period market used throughout the fast tests. Prosumer 0
// is generation-heavy early, prosumer 1 mid-day with a private battery,
// prosumer 2 is load-heavy. Both capacity price slopes are positive here so
// the quadratic coupling paths get exercised.
inline sesm::Scenario make_tiny_scenario() {
  using namespace sesm;
  Scenario s;
  s.name = "tiny-3";
  s.horizon = {4, 1.0};
  s.tariffs.buy = {0.8, 0.4, 0.9, 1.1};
  s.tariffs.sell = {0.30, 0.20, 0.30, 0.35};
  s.tariffs.theta1 = 0.01;
  s.tariffs.theta0 = 0.02;

  ProsumerParams p0;
  p0.id = 1;
  p0.load = {2, 2, 4, 5};
  p0.dg = {8, 6, 1, 1};
  p0.alpha_sh = 0.2;
  p0.lambda_sh = 0.03;
  p0.lambda_tr_ses = 0.030;

  ProsumerParams p1;
  p1.id = 2;
  p1.load = {3, 3, 3, 4};
  p1.dg = {0, 5, 6, 0};
  p1.alpha_sh = 0.2;
  p1.lambda_sh = 0.04;
  p1.lambda_tr_ses = 0.020;
  PrivateEssParams ess;
  ess.eta = 0.95;
  ess.p_max = 2;
  ess.s_max = 4;
  ess.soc_min = 0.1;
  ess.soc_max = 0.9;
  ess.soc0 = 0.1;
  ess.lambda_u = 0.11;
  p1.ess = ess;

  ProsumerParams p2;
  p2.id = 3;
  p2.load = {4, 5, 5, 6};
  p2.dg = {0, 1, 1, 0};
  p2.alpha_sh = 0.2;
  p2.lambda_sh = 0.05;
  p2.lambda_tr_ses = 0.025;

  s.prosumers = {p0, p1, p2};

  s.ses.p_cap = 5;
  s.ses.s_cap = 10;
  s.ses.eta = 0.9;
  s.ses.soc_min = 0.1;
  s.ses.soc_max = 0.9;
  s.ses.soc0 = 0.1;
  s.ses.lambda_u = 0.05;
  s.ses.a_s = 0.20;
  s.ses.b_s = 0.02;
  s.ses.a_p = 0.25;
  s.ses.b_p = 0.01;

  s.network.impedance.resize(3, 3);
  s.network.impedance << 0, 1.0, 2.0, 1.0, 0, 1.5, 2.0, 1.5, 0;
  s.flags = {true, true};
  return s;
}

inline sesm::ProsumerDecision random_decision(sesm::Rng& rng, int N, int T, double scale) {
  sesm::ProsumerDecision d = sesm::ProsumerDecision::zero(N, T);
  auto r = [&] { return scale * rng.normal(); };
  for (int t = 0; t < T; ++t) {
    d.ess_ch[t] = r();
    d.ess_dis[t] = r();
    d.ses_ch[t] = r();
    d.ses_dis[t] = r();
    d.buy[t] = r();
    d.sell[t] = r();
    d.shift[t] = r();
    for (int j = 0; j < N; ++j) {
      d.p2p(j, t) = r();
      d.p2p_pos(j, t) = r();
    }
  }
  d.ses_p_max = r();
  d.ses_s_max = r();
  return d;
}

inline sesm::ProsumerDecision lerp(const sesm::ProsumerDecision& a,
                                   const sesm::ProsumerDecision& b, double th) {
  sesm::ProsumerDecision d = a;
  int T = (int)a.buy.size();
  for (int t = 0; t < T; ++t) {
    d.ess_ch[t] = th * a.ess_ch[t] + (1 - th) * b.ess_ch[t];
    d.ess_dis[t] = th * a.ess_dis[t] + (1 - th) * b.ess_dis[t];
    d.ses_ch[t] = th * a.ses_ch[t] + (1 - th) * b.ses_ch[t];
    d.ses_dis[t] = th * a.ses_dis[t] + (1 - th) * b.ses_dis[t];
    d.buy[t] = th * a.buy[t] + (1 - th) * b.buy[t];
    d.sell[t] = th * a.sell[t] + (1 - th) * b.sell[t];
    d.shift[t] = th * a.shift[t] + (1 - th) * b.shift[t];
  }
  d.p2p = th * a.p2p + (1 - th) * b.p2p;
  d.p2p_pos = th * a.p2p_pos + (1 - th) * b.p2p_pos;
  d.ses_p_max = th * a.ses_p_max + (1 - th) * b.ses_p_max;
  d.ses_s_max = th * a.ses_s_max + (1 - th) * b.ses_s_max;
  return d;
}

}  // namespace sesm_test
