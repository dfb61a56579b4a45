#include "jpmcount/circuit_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "jpmcount/constants.hpp"

namespace jpm {

namespace {

void require_non_negative(double value, const char* field) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(field) + " must be a finite non-negative number");
  }
}

}  // namespace

void DeviceConfig::validate() const {
  require_non_negative(C, "C");
  require_non_negative(I0, "I0");
  require_non_negative(Cres, "Cres");
  require_non_negative(Lres, "Lres");
  require_non_negative(Ccoup, "Ccoup");
  require_non_negative(lambda2, "lambda2");
  require_non_negative(Gamma10, "Gamma10");
  require_non_negative(Gamma22, "Gamma22");
  require_non_negative(Gamma11, "Gamma11");
  require_non_negative(gap_frequency, "gap_frequency");
  if (Gamma21) require_non_negative(*Gamma21, "Gamma21");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1)");
  }
  if (!(beta_one_photon > 0.0 && beta_one_photon < 1.0)) {
    throw std::invalid_argument("beta_one_photon must lie in (0, 1)");
  }
}

CouplingRates time_scaled(const CouplingRates& r, double factor) {
  CouplingRates s = r;
  s.Delta *= factor;
  s.g1 *= factor;
  s.g2 *= factor;
  s.g_tilde *= factor;
  s.chi1 *= factor;
  s.chi2 *= factor;
  s.gamma0 *= factor;
  s.gamma1 *= factor;
  s.gamma2 *= factor;
  s.Gamma10 *= factor;
  s.Gamma21 *= factor;
  s.Gamma11 *= factor;
  s.Gamma22 *= factor;
  return s;
}

CouplingRates with_tunneling(CouplingRates rates, double gamma0, double gamma1, double gamma2) {
  rates.gamma0 = gamma0;
  rates.gamma1 = gamma1;
  rates.gamma2 = gamma2;
  return rates;
}

double RenormalizedCapacitances::resonator_impedance(double Lres) const {
  return std::sqrt(Lres / Cres_t);
}

double RenormalizedCapacitances::resonator_frequency(double Lres) const {
  return 1.0 / std::sqrt(Lres * Cres_t);
}

double josephson_energy(double I0) {
  if (!(I0 >= 0.0)) throw std::invalid_argument("I0 must be non-negative");
  return I0 * phys::kFluxQuantum / kTwoPi;
}

double charging_energy(double C) {
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  return phys::kElementaryCharge * phys::kElementaryCharge / (2.0 * C);
}

double washboard_potential(double phi, const DeviceConfig& cfg) {
  const double wj = josephson_energy(cfg.I0);
  return -wj * std::cos(phi) - wj * cfg.beta * phi;
}

double washboard_slope(double phi, const DeviceConfig& cfg) {
  const double wj = josephson_energy(cfg.I0);
  return wj * (std::sin(phi) - cfg.beta);
}

double cubic_potential(double delta, const DeviceConfig& cfg) {
  const double wj = josephson_energy(cfg.I0);
  const double a = std::sqrt(1.0 - cfg.beta * cfg.beta);
  return wj * (0.5 * a * delta * delta - cfg.beta / 6.0 * delta * delta * delta);
}

LevelStructure derive_levels(const DeviceConfig& cfg) {
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1)");
  }
  LevelStructure lv;
  lv.WJ = josephson_energy(cfg.I0);
  lv.WC = charging_energy(cfg.C);
  const double one_minus_b2 = 1.0 - cfg.beta * cfg.beta;
  lv.omega_p = std::sqrt(8.0 * lv.WJ * lv.WC) / phys::kHbar * std::pow(one_minus_b2, 0.25);
  lv.n0 = std::pow(one_minus_b2, 1.25) / (3.0 * cfg.beta * cfg.beta) *
          std::sqrt(lv.WJ / (2.0 * lv.WC));
  lv.omega10 = lv.omega_p * (1.0 - 5.0 / (36.0 * lv.n0));
  lv.omega20 = lv.omega_p * (2.0 - 5.0 / (12.0 * lv.n0));
  lv.omega = 0.5 * lv.omega20;
  lv.Delta = lv.omega10 - lv.omega;
  lv.phi_min = std::asin(cfg.beta);
  lv.delta_max = 2.0 / std::tan(lv.phi_min);
  return lv;
}

CouplingRates derive_couplings(const LevelStructure& levels, const DeviceConfig& cfg) {
  if (!(levels.Delta > 0.0)) throw DomainError("detuning Delta must be positive");
  CouplingRates r;
  r.Delta = levels.Delta;
  r.lambda2 = cfg.lambda2;
  r.g2 = cfg.lambda2 * levels.Delta;
  r.g1 = r.g2 / std::sqrt(2.0);
  r.lambda1 = r.g1 / levels.Delta;
  r.g_tilde = r.g1 * r.g2 / levels.Delta;
  r.chi1 = r.g1 * r.g1 / levels.Delta;
  r.chi2 = r.g2 * r.g2 / levels.Delta;
  r.Gamma10 = to_angular(cfg.Gamma10);
  r.Gamma21 = cfg.Gamma21 ? to_angular(*cfg.Gamma21) : 2.0 * r.Gamma10;
  r.Gamma11 = to_angular(cfg.Gamma11);
  r.Gamma22 = to_angular(cfg.Gamma22);
  return r;
}

RenormalizedCapacitances renormalized_capacitances(double C, double Ccoup, double Cres) {
  if (!(C > 0.0) || !(Cres > 0.0)) {
    throw std::invalid_argument("C and Cres must be positive");
  }
  if (!(Ccoup >= 0.0)) throw std::invalid_argument("Ccoup must be non-negative");
  RenormalizedCapacitances out;
  out.C_t = (C + Ccoup * (1.0 + C / Cres)) / (1.0 + Ccoup / Cres);
  out.Cres_t = (Cres + Ccoup * (1.0 + Cres / C)) / (1.0 + Ccoup / C);
  out.Ccoup_t = Ccoup > 0.0 ? 1.0 / (1.0 / Ccoup + 1.0 / C + 1.0 / Cres) : 0.0;
  return out;
}

std::optional<std::pair<double, double>> circuit_couplings(const DeviceConfig& cfg,
                                                           const LevelStructure& levels) {
  if (!(cfg.Ccoup > 0.0 && cfg.Cres > 0.0 && cfg.Lres > 0.0)) return std::nullopt;
  const auto caps = renormalized_capacitances(cfg.C, cfg.Ccoup, cfg.Cres);
  const double impedance = caps.resonator_impedance(cfg.Lres);
  // Harmonic charge matrix elements |<1|Q|0>| = sqrt(hbar wp C / 2), <2|Q|1> = sqrt(2) <1|Q|0>.
  const double q10 = std::sqrt(phys::kHbar * levels.omega_p * caps.C_t / 2.0);
  const double prefactor =
      caps.Ccoup_t / (cfg.C * cfg.Cres) * std::sqrt(phys::kHbar / (2.0 * impedance));
  const double g1 = prefactor * q10 / phys::kHbar;
  return std::make_pair(g1, std::sqrt(2.0) * g1);
}

int n_max(const CouplingRates& rates, double margin) {
  if (!(rates.chi2 > 0.0)) throw std::invalid_argument("chi2 must be positive");
  const double value = margin * rates.level2_width() / rates.chi2;
  if (!std::isfinite(value)) return 0;
  return static_cast<int>(std::floor(value));
}

}  // namespace jpm
