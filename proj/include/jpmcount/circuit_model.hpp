#pragma once

// Static device quantities of a current-biased JPM coupled to a resonator:
// washboard potential, perturbative level structure, couplings and rates.

#include <optional>
#include <utility>

namespace jpm {

/// Raw circuit inputs. Rates and frequencies are ordinary (Hz), matching the
/// "/2pi" convention of published parameter tables.
struct DeviceConfig {
  double C = 0.0;      ///< junction capacitance, F
  double I0 = 0.0;     ///< critical current, A
  double beta = 0.0;   ///< bias ratio I/I0, in (0, 1)
  double Cres = 0.0;   ///< resonator capacitance, F (0 = not specified)
  double Lres = 0.0;   ///< resonator inductance, H (0 = not specified)
  double Ccoup = 0.0;  ///< coupling capacitance, F (0 = not specified)
  double lambda2 = 0.1;
  double Gamma10 = 0.0;          ///< relaxation 1 -> 0, Hz
  double Gamma22 = 0.0;          ///< pure dephasing of level 2, Hz
  double Gamma11 = 1.0e6;        ///< pure dephasing of level 1, Hz
  std::optional<double> Gamma21;  ///< relaxation 2 -> 1, Hz; default 2*Gamma10
  double gap_frequency = 82.0e9;  ///< superconducting gap, Hz
  double beta_one_photon = 0.98473;  ///< bias of the two-level (one-photon) mode

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct LevelStructure {
  double WJ = 0.0;       ///< Josephson energy, J
  double WC = 0.0;       ///< charging energy, J
  double omega_p = 0.0;  ///< plasma frequency, rad/s
  double n0 = 0.0;       ///< barrier height in units of hbar*omega_p
  double omega10 = 0.0;
  double omega20 = 0.0;
  double omega = 0.0;    ///< detected photon frequency omega20/2
  double Delta = 0.0;    ///< detuning omega10 - omega
  double phi_min = 0.0;  ///< arcsin(beta)
  double delta_max = 0.0;  ///< cubic-approximation barrier top, 2 cot(phi_min)
};

/// Couplings and rates in angular units (rad/s, 1/s). Derived rates are
/// computed on access so the sum rules always hold.
struct CouplingRates {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double Delta = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double g_tilde = 0.0;
  double chi1 = 0.0;
  double chi2 = 0.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double Gamma10 = 0.0;
  double Gamma21 = 0.0;
  double Gamma11 = 0.0;
  double Gamma22 = 0.0;

  double GammaT1() const { return gamma1 + Gamma10; }
  double GammaT2() const { return gamma2 + Gamma21; }
  double d01() const { return gamma0 + gamma1 + Gamma10 + Gamma11; }
  double d12() const { return gamma1 + gamma2 + Gamma10 + Gamma21 + Gamma22; }
  double d02() const { return gamma0 + gamma2 + Gamma21 + Gamma22; }
  /// Width of the two-photon resonance, tildeGamma2 + Gamma22.
  double level2_width() const { return GammaT2() + Gamma22; }
  /// Width of level 1, tildeGamma1 + Gamma11.
  double level1_width() const { return GammaT1() + Gamma11; }
};

/// Rates with all of them multiplied by `factor`, couplings included. A pure
/// change of time unit.
CouplingRates time_scaled(const CouplingRates& rates, double factor);

/// Same rates with tunneling rates (1/s) replaced.
CouplingRates with_tunneling(CouplingRates rates, double gamma0, double gamma1,
                             double gamma2);

struct RenormalizedCapacitances {
  double C_t = 0.0;
  double Cres_t = 0.0;
  double Ccoup_t = 0.0;

  double resonator_impedance(double Lres) const;
  double resonator_frequency(double Lres) const;
};

double josephson_energy(double I0);
double charging_energy(double C);

/// Exact washboard potential -WJ cos(phi) - WJ beta phi, in J.
double washboard_potential(double phi, const DeviceConfig& cfg);
double washboard_slope(double phi, const DeviceConfig& cfg);

/// Cubic expansion about the well minimum, WJ (sqrt(1-b^2)/2 d^2 - b/6 d^3).
double cubic_potential(double delta, const DeviceConfig& cfg);

LevelStructure derive_levels(const DeviceConfig& cfg);

/// g2 = lambda2 Delta, g1 = g2/sqrt(2). Tunneling rates are left at zero.
CouplingRates derive_couplings(const LevelStructure& levels, const DeviceConfig& cfg);

RenormalizedCapacitances renormalized_capacitances(double C, double Ccoup, double Cres);

/// Optional consistency route: (g1, g2) from the charge matrix elements in the
/// harmonic approximation. Requires Ccoup, Cres and Lres.
std::optional<std::pair<double, double>> circuit_couplings(const DeviceConfig& cfg,
                                                           const LevelStructure& levels);

inline constexpr double kDefaultNmaxMargin = 0.65;

/// Largest photon number with chi2 * N <= margin * (tildeGamma2 + Gamma22).
int n_max(const CouplingRates& rates, double margin = kDefaultNmaxMargin);

}  // namespace jpm
