#pragma once

// WKB escape rates of the metastable levels in the exact washboard well.

#include <utility>
#include <vector>

#include "jpmcount/circuit_model.hpp"

namespace jpm {

struct TunnelingResult {
  int level_index = 0;
  double energy = 0.0;  ///< above the well minimum, J
  std::pair<double, double> turning_points;  ///< phases bracketing the barrier top
  double action = 0.0;  ///< sigma, in units of hbar
  double rate = 0.0;    ///< 1/s
};

/// Position of the barrier maximum of the exact potential, pi - phi_min.
double barrier_top_phase(const DeviceConfig& cfg);

/// Exact barrier height W(phi_top) - W(phi_min), J.
double barrier_height(const DeviceConfig& cfg);

/// Energy of level n above the well minimum from the second-order cubic
/// expansion: hbar wp [(n + 1/2) - 5/(72 n0) (n^2 + n + 11/30)].
double level_energy(const LevelStructure& levels, int n);

/// Number of perturbative levels below the exact barrier top.
int bound_level_count(const LevelStructure& levels, const DeviceConfig& cfg);

/// First `count` level energies; throws DomainError if fewer are bound.
std::vector<double> level_energies(const LevelStructure& levels, const DeviceConfig& cfg,
                                   int count);

/// Classical turning points under the barrier for energy E above the well
/// minimum: inner point on the barrier side of the well, outer point past the
/// barrier top. Degenerate at the barrier top.
std::pair<double, double> turning_points(double E, const DeviceConfig& cfg);

/// (1/hbar) * integral of sqrt(2 m (W - E)) dphi over [lo, hi], with
/// m = C (Phi0/2pi)^2. [lo, hi] must lie between the turning points for E.
double action_integral(const DeviceConfig& cfg, double E, double lo, double hi);

/// rate = (wp / 2pi) exp(-2 sigma).
TunnelingResult tunneling_rate(int level_index, const LevelStructure& levels,
                               const DeviceConfig& cfg);

struct TunnelingRates {
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

/// gamma0..gamma2 of the two-photon (three-level) mode.
TunnelingRates wkb_rates(const LevelStructure& levels, const DeviceConfig& cfg);

/// Bias of the one-photon mode; throws DomainError unless exactly two levels
/// fit below the barrier at cfg.beta_one_photon.
double two_level_bias(const DeviceConfig& cfg);

/// gamma1 in the one-photon mode (level 1 at the two-level bias).
TunnelingResult one_photon_mode_rate(const DeviceConfig& cfg);

}  // namespace jpm
