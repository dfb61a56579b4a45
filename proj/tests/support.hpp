#pragma once

#include <cmath>
#include <random>

#include <doctest.h>

#include "jpmcount/circuit_model.hpp"
#include "jpmcount/constants.hpp"
#include "jpmcount/harness.hpp"

namespace jpm::test {

/// Reference junction: 2 pF, 10 uA, bias 0.97987, Gamma10 318 kHz, Gamma22 2.1 MHz.
inline DeviceConfig reference_device() {
  DeviceConfig cfg;
  cfg.C = 2e-12;
  cfg.I0 = 10e-6;
  cfg.beta = 0.97987;
  cfg.Gamma10 = 318e3;
  cfg.Gamma22 = 2.1e6;
  cfg.lambda2 = 0.1;
  return cfg;
}

/// Tabulated tunneling estimates 37 Hz / 54 kHz / 41 MHz, one-photon 19 MHz.
inline TunnelingOverrides tabulated_rates() {
  TunnelingOverrides o;
  o.gamma0 = 37.0;
  o.gamma1 = 54e3;
  o.gamma2 = 41e6;
  o.gamma1_one_photon = 19e6;
  return o;
}

inline DeviceModel reference_model() {
  return build_device_model(reference_device(), tabulated_rates());
}

/// Purely relative comparison (doctest's default adds an absolute scale of 1).
inline doctest::Approx approx(double value, double eps = 1e-9) {
  return doctest::Approx(value).scale(0.0).epsilon(eps);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// Random rate set obeying gamma0 << B20 << tildeGamma2 and gamma0 << gamma1 << gamma2.
inline CouplingRates random_hierarchical_rates(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  CouplingRates r;
  r.Delta = to_angular(log_uniform(100e6, 300e6));
  r.lambda2 = log_uniform(0.05, 0.12);
  r.g2 = r.lambda2 * r.Delta;
  r.g1 = r.g2 / std::sqrt(2.0);
  r.lambda1 = r.g1 / r.Delta;
  r.g_tilde = r.g1 * r.g2 / r.Delta;
  r.chi1 = r.g1 * r.g1 / r.Delta;
  r.chi2 = r.g2 * r.g2 / r.Delta;
  r.Gamma10 = to_angular(log_uniform(100e3, 600e3));
  r.Gamma21 = 2.0 * r.Gamma10;
  r.Gamma11 = to_angular(1e6);
  r.Gamma22 = to_angular(log_uniform(0.5e6, 5e6));
  r.gamma2 = to_angular(log_uniform(20e6, 80e6));
  r.gamma1 = to_angular(log_uniform(20e3, 100e3));
  r.gamma0 = to_angular(log_uniform(10.0, 100.0));
  return r;
}

}  // namespace jpm::test
