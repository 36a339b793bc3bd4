// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0
//
// Market data model: prosumers with private storage, flexible loads and
// distributed generation, a shared storage plant renting power/storage
// capacity blocks, wholesale and peer-to-peer energy transactions.
// All quantities: power kW, energy kWh, money CNY. Period costs integrate
// power over dt hours.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sesm/qp.hpp"
#include "sesm/util.hpp"

namespace sesm {

class ScenarioInvariantError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct Horizon {
  int T = 24;
  double dt = 1.0;  // hours per period
};

struct PrivateEssParams {
  double eta = 0.95;  // per-leg efficiency
  double p_max = 0;   // kW
  double s_max = 0;   // kWh
  double soc_min = 0.1, soc_max = 0.9;
  double soc0 = 0.1;     // initial state of charge fraction
  double lambda_u = 0;   // usage price CNY/kWh
};

struct ProsumerParams {
  int id = 0;
  std::vector<double> load;  // base load kW, length T
  std::vector<double> dg;    // generation kW, length T
  double alpha_sh = 0;       // shiftable fraction of base load
  double lambda_sh = 0.04;   // shifting price coefficient CNY/kWh^2
  std::optional<PrivateEssParams> ess;
  double lambda_tr_ses = 0;  // unit transmission price to the shared plant CNY/kWh
};

struct SharedEssParams {
  double p_cap = 0;  // total rentable power capacity kW
  double s_cap = 0;  // total rentable storage capacity kWh
  double eta = 0.95;
  double soc_min = 0.1, soc_max = 0.9;
  double soc0 = 0.1;    // initial fraction of each rented block
  double lambda_u = 0;  // usage price CNY/kWh
  // capacity price curves: price = a + b * total rented
  double a_s = 0, b_s = 0;  // storage CNY/kWh-day
  double a_p = 0, b_p = 0;  // power CNY/kW-day
};

struct Tariffs {
  std::vector<double> buy, sell;  // CNY/kWh, length T, buy_t > sell_t
  double theta1 = 0, theta0 = 0;  // transmission fee coefficients
};

struct Network {
  Eigen::MatrixXd impedance;  // symmetric N x N ohms, zero diagonal
};

struct ScenarioFlags {
  bool p2p_enabled = true;
  bool ses_enabled = true;
};

struct Scenario {
  std::string name;
  Horizon horizon;
  std::vector<ProsumerParams> prosumers;
  SharedEssParams ses;
  Tariffs tariffs;
  Network network;
  ScenarioFlags flags;
  bool private_ess_terminal_balance = false;  // optional S_T >= S_0 for private units

  int num_prosumers() const { return (int)prosumers.size(); }
  int periods() const { return horizon.T; }
  void validate() const;  // throws ScenarioInvariantError naming the offending field
  Scenario with_flags(ScenarioFlags f) const {
    Scenario s = *this;
    s.flags = f;
    return s;
  }
};

// Case toggles: 1 = grid only, 2 = p2p only, 3 = shared storage only, 4 = both.
ScenarioFlags case_flags(int case_id);

struct ProsumerDecision {
  std::vector<double> ess_ch, ess_dis;  // private storage dispatch kW
  std::vector<double> ses_ch, ses_dis;  // rented-block dispatch kW
  std::vector<double> buy, sell;        // wholesale kW
  std::vector<double> shift;            // load shifting kW (signed)
  Eigen::MatrixXd p2p;                  // N x T, row j = power bought from prosumer j
  Eigen::MatrixXd p2p_pos;              // N x T, linearization aux >= max(0, p2p)
  double ses_p_max = 0;                 // rented power capacity kW
  double ses_s_max = 0;                 // rented storage capacity kWh

  static ProsumerDecision zero(int n_prosumers, int T);
};

struct CostBreakdown {
  double c_g = 0;         // wholesale energy
  double c_p2p = 0;       // peer-to-peer energy (signed)
  double c_ses_rent = 0;  // capacity rent
  double c_ses_use = 0;   // shared-plant usage
  double c_ses_tr = 0;    // transmission to the shared plant
  double c_es = 0;        // private storage usage
  double c_tr = 0;        // peer-to-peer transmission fees
  double c_sh = 0;        // load-shifting discomfort
  double total = 0;       // sum of parts

  void refresh_total() {
    total = c_g + c_p2p + c_ses_rent + c_ses_use + c_ses_tr + c_es + c_tr + c_sh;
  }
};

// ---- elementary market quantities ----

double net_load(const ProsumerParams& p, const ProsumerDecision& d, int t);
double transmission_price(double theta1, double theta0, double x_ij);
double p2p_price(const Tariffs& tariffs, int t);
double p2p_fee(const Scenario& s, int i, int j);  // buyer-paid unit fee between i and j

// realized capacity prices (lambda_s, lambda_p) given everybody's rents
std::pair<double, double> capacity_prices(const SharedEssParams& ses,
                                          const std::vector<ProsumerDecision>& all);

// every cost component except the capacity rent
CostBreakdown cost_local(const Scenario& s, int i, const ProsumerDecision& d);

double cost_rent(const SharedEssParams& ses, const ProsumerDecision& d_i,
                 const std::vector<ProsumerDecision>& all);

// stored-energy series reconstructed from the dispatch recursion; element 0
// is the initial level, element t the level after period t-1
std::vector<double> ess_energy_series(const PrivateEssParams& e, const ProsumerDecision& d,
                                      const Horizon& h);
std::vector<double> ses_energy_series(const SharedEssParams& ses, const ProsumerDecision& d,
                                      const Horizon& h);

// ---- feasibility ----

enum class ConstraintKind {
  EssChargeLimit,
  EssDischargeLimit,
  EssEnergyLower,
  EssEnergyUpper,
  EssTerminalEnergy,
  ShiftBound,
  ShiftBalance,
  SesChargeNonneg,
  SesDischargeNonneg,
  SesChargeLimit,
  SesDischargeLimit,
  SesEnergyLower,
  SesEnergyUpper,
  SesTerminalEnergy,
  SesPowerCapNonneg,
  SesStorageCapNonneg,
  BuyNonneg,
  SellNonneg,
  PowerBalance,
  TradePosNonneg,
  TradePosCover,
  SelfTradeZero,
  TradeDisabled,
  SesDisabled,
  TradeAntisymmetry,
  SesPowerCap,
  SesStorageCap,
};

const char* to_string(ConstraintKind k);

struct Violation {
  ConstraintKind kind;
  int prosumer = -1;      // owning prosumer, -1 for system-wide rows
  int period = -1;        // -1 when not period-indexed
  int counterparty = -1;  // peer index for trade rows
  double residual = 0;    // positive violation magnitude
  std::string describe() const;
};

std::vector<Violation> check_local_feasibility(const Scenario& s, int i,
                                               const ProsumerDecision& d, double tol);
std::vector<Violation> check_coupled_feasibility(const Scenario& s,
                                                 const std::vector<ProsumerDecision>& all,
                                                 double tol);

// ---- linear-algebra view of one prosumer's decision ----

// Column layout of a prosumer's decision vector. The two capacity scalars sit
// last so the (dispatch block | capacity block) split is a column partition.
class VarLayout {
 public:
  VarLayout(int n_prosumers, int T) : n_(n_prosumers), T_(T) {}
  int ess_ch(int t) const { return t; }
  int ess_dis(int t) const { return T_ + t; }
  int ses_ch(int t) const { return 2 * T_ + t; }
  int ses_dis(int t) const { return 3 * T_ + t; }
  int buy(int t) const { return 4 * T_ + t; }
  int sell(int t) const { return 5 * T_ + t; }
  int shift(int t) const { return 6 * T_ + t; }
  int p2p(int j, int t) const { return 7 * T_ + j * T_ + t; }
  int p2p_pos(int j, int t) const { return 7 * T_ + n_ * T_ + j * T_ + t; }
  int ses_p_max() const { return 7 * T_ + 2 * n_ * T_; }
  int ses_s_max() const { return 7 * T_ + 2 * n_ * T_ + 1; }
  int size() const { return 7 * T_ + 2 * n_ * T_ + 2; }
  int dispatch_size() const { return size() - 2; }
  int prosumers() const { return n_; }
  int periods() const { return T_; }

  Vec pack(const ProsumerDecision& d) const;
  ProsumerDecision unpack(const Vec& x) const;

 private:
  int n_, T_;
};

struct RowInfo {
  ConstraintKind kind;
  int period = -1;
  int counterparty = -1;
};

// two-sided linear rows  lo <= C x <= hi  over one prosumer's layout
struct RowBlock {
  std::vector<Triplet> trips;
  std::vector<double> lo, hi;
  std::vector<RowInfo> info;
  int cols = 0;
  int rows() const { return (int)lo.size(); }
  SpMat matrix() const;
};

RowBlock local_rows(const Scenario& s, int i);

// Shared (coupled) rows in canonical order: power cap, storage cap, then an
// antisymmetry equality per (a<b, t). Identical row space for every prosumer.
RowBlock shared_rows_for(const Scenario& s, int i);

// local quadratic + linear cost terms over the layout (H diagonal triplets
// scaled so that 1/2 x'Hx reproduces the shifting cost)
void local_cost_terms(const Scenario& s, int i, std::vector<Triplet>& h_trips, Vec& g);

// One-sided abstraction: Aloc x_i <= bloc, sum_j E_j x_j <= f.  Equalities
// appear as paired rows. Provenance maps each one-sided row back to its
// two-sided origin for dual bookkeeping.
struct AffineForm {
  SpMat Aloc;
  Vec bloc;
  SpMat Eshr;
  Vec f;
  struct Origin {
    int two_sided_row;
    bool upper;  // true: c x <= hi row, false: -c x <= -lo row
  };
  std::vector<Origin> loc_origin, shr_origin;
  std::vector<RowInfo> loc_info, shr_info;
};

AffineForm assemble_affine_form(const Scenario& s, int i);

// value of the market-wide optimization objective at a decision profile:
// sum of local costs plus the capacity-price quadratic
double social_objective(const Scenario& s, const std::vector<ProsumerDecision>& all);

}  // namespace sesm
