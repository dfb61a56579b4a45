#pragma once

// End-to-end reproductions and cross-checks between the model layers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jpmcount/circuit_model.hpp"
#include "jpmcount/rate_model.hpp"
#include "jpmcount/semiclassics.hpp"

namespace jpm {

/// Tunneling rates (Hz, i.e. gamma/2pi) that replace the WKB estimates when set.
struct TunnelingOverrides {
  std::optional<double> gamma0;
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  std::optional<double> gamma1_one_photon;
};

struct DeviceModel {
  DeviceConfig cfg;
  LevelStructure levels;
  CouplingRates rates;                    ///< tunneling rates filled in
  std::optional<TunnelingRates> wkb;      ///< unset if the well holds < 3 levels
  std::optional<double> gamma1_one_photon;  ///< 1/s; unset if unavailable
};

/// Levels, couplings and tunneling rates for a device. WKB supplies any rate
/// that is not overridden; throws DomainError if a needed rate is unavailable.
DeviceModel build_device_model(const DeviceConfig& cfg, const TunnelingOverrides& overrides = {});

/// Same couplings with lambda2 (and everything derived from it) replaced.
CouplingRates with_lambda2(const CouplingRates& rates, double lambda2);

enum class ToleranceKind {
  kRelative,  ///< |c - r| / |r|
  kPoints,    ///< |c - r| in percentage points (values given in %)
  kFactor,    ///< max(c/r, r/c)
  kExact,     ///< |c - r|
};

struct ReproductionResult {
  std::string name;
  std::string unit;
  double reference = 0.0;
  double computed = 0.0;
  double deviation = 0.0;
  double tolerance = 0.0;
  ToleranceKind kind = ToleranceKind::kRelative;
  bool pass = false;
};

ReproductionResult compare(std::string name, std::string unit, double reference, double computed,
                           double tolerance, ToleranceKind kind);

/// Comparison against the tabulated reference device. Tunneling rates are always the WKB values; the
/// performance chain uses model.rates (overrides included).
std::vector<ReproductionResult> reproduce_table1(const DeviceModel& model,
                                                 double margin = kDefaultNmaxMargin);

struct Fig4Curve {
  std::vector<double> t;
  std::vector<double> miss;   ///< 1 - P_bright
  std::vector<double> eps;    ///< equal-prior discrimination error
  std::vector<bool> valid;
  double t_argmin = 0.0;      ///< grid argmin of eps over valid points
  double branching_floor = 0.0;
};
Fig4Curve reproduce_fig4(const CouplingRates& rates, const std::vector<double>& times);

struct CrossCheckOptions {
  double time_scale = 1.0;           ///< all rates multiplied, times divided
  double tilde_gamma2_scale = 1.0;   ///< gamma2 and Gamma21 multiplied
  double coupling_scale = 1.0;       ///< g~ multiplied (0 decouples)
  int n_fock = 6;
  int points = 41;                   ///< grid over [0.1 t_opt, t_opt]
  double rel_tol = 1e-8;
  double abs_tol = 1e-11;
};

struct CrossCheckResult {
  std::vector<double> t;  ///< in the scaled time unit
  std::vector<double> lindblad;
  std::vector<double> rate_ode;
  std::vector<double> closed_form;  ///< P_bright formula
  double max_dev_ode = 0.0;
  double max_dev_closed_form = 0.0;
  double width_over_b20 = 0.0;  ///< (tildeGamma2 + Gamma22)/B20 of the run
  bool edge_flag = false;
  std::size_t steps = 0;
};

/// Full Lindblad evolution (effective Hamiltonian + bare dissipators, start in
/// |2 photons, JPM 0>) against the rate equations and the P_bright formula.
CrossCheckResult cross_check_rate_vs_lindblad(const CouplingRates& rates,
                                              const CrossCheckOptions& options = {});

struct LambdaScalingOptions {
  int n_fock = 6;
  std::uint64_t seed = 20240601;
};

struct LambdaScalingResult {
  std::vector<double> lambdas;
  std::vector<double> hamiltonian_residual;      ///< in units of g2
  std::vector<double> hamiltonian_residual_raw;  ///< rad/s
  std::vector<double> dressed_residual;          ///< in units of the fastest rate
  double hamiltonian_slope = 0.0;
  double hamiltonian_raw_slope = 0.0;
  double dressed_slope = 0.0;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Residuals of the frame change at each lambda2: U^dag H U against the
/// effective Hamiltonian, and the exact dissipator transform against the
/// first-order dressed correction.
LambdaScalingResult lambda_scaling_study(const CouplingRates& rates,
                                         const std::vector<double>& lambdas,
                                         const LambdaScalingOptions& options = {});

/// Two-step report with validity checks at t_opt.
DetectionReport protocol_report(const DeviceModel& model, const ValidityOptions& validity = {},
                                const TwoStepOptions& options = {});

}  // namespace jpm
