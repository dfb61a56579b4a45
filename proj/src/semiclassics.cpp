#include "jpmcount/semiclassics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <string>

#include "jpmcount/constants.hpp"

namespace jpm {

namespace {

double well_bottom(const DeviceConfig& cfg) {
  return washboard_potential(std::asin(cfg.beta), cfg);
}

double find_root(const DeviceConfig& cfg, double target, double lo, double hi) {
  auto f = [&](double phi) { return washboard_potential(phi, cfg) - target; };
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  return 0.5 * (a + b);
}

}  // namespace

double barrier_top_phase(const DeviceConfig& cfg) { return kPi - std::asin(cfg.beta); }

double barrier_height(const DeviceConfig& cfg) {
  return washboard_potential(barrier_top_phase(cfg), cfg) - well_bottom(cfg);
}

double level_energy(const LevelStructure& levels, int n) {
  const double nn = static_cast<double>(n);
  const double shift = 5.0 / (72.0 * levels.n0) * (nn * nn + nn + 11.0 / 30.0);
  return phys::kHbar * levels.omega_p * ((nn + 0.5) - shift);
}

int bound_level_count(const LevelStructure& levels, const DeviceConfig& cfg) {
  const double top = barrier_height(cfg);
  int count = 0;
  double previous = 0.0;
  for (int n = 0;; ++n) {
    const double e = level_energy(levels, n);
    // The expansion stops making sense once levels no longer ascend.
    if (e <= previous || e >= top) break;
    previous = e;
    ++count;
  }
  return count;
}

std::vector<double> level_energies(const LevelStructure& levels, const DeviceConfig& cfg,
                                   int count) {
  const int bound = bound_level_count(levels, cfg);
  if (bound < count) {
    throw DomainError("only " + std::to_string(bound) + " level(s) fit below the barrier, " +
                      std::to_string(count) + " requested (n0 = " + std::to_string(levels.n0) +
                      ")");
  }
  std::vector<double> energies;
  energies.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) energies.push_back(level_energy(levels, n));
  return energies;
}

std::pair<double, double> turning_points(double E, const DeviceConfig& cfg) {
  const double height = barrier_height(cfg);
  const double scale = josephson_energy(cfg.I0);
  if (!(E >= 0.0) || E > height + 1e-12 * scale) {
    throw DomainError("energy lies outside the well (0 <= E <= barrier height)");
  }
  const double phi_min = std::asin(cfg.beta);
  const double phi_top = barrier_top_phase(cfg);
  if (E >= height - 1e-14 * scale) return {phi_top, phi_top};
  const double target = well_bottom(cfg) + E;
  // Beyond the top, W decreases monotonically down to the next minimum, which is
  // lower than this one by 2 pi beta WJ.
  const double inner = E <= 0.0 ? phi_min : find_root(cfg, target, phi_min, phi_top);
  const double outer = find_root(cfg, target, phi_top, phi_min + kTwoPi);
  return {inner, outer};
}

double action_integral(const DeviceConfig& cfg, double E, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const double mass = cfg.C * std::pow(phys::kFluxQuantum / kTwoPi, 2);
  const double target = well_bottom(cfg) + E;
  // phi = lo + (hi - lo)(1 - cos t)/2 turns the square-root endpoint behaviour
  // of sqrt(W - E) at turning points into a smooth integrand on [0, pi].
  const double half = 0.5 * (hi - lo);
  auto integrand = [&](double t) {
    const double phi = lo + half * (1.0 - std::cos(t));
    const double gap = washboard_potential(phi, cfg) - target;
    return gap > 0.0 ? std::sqrt(2.0 * mass * gap) * half * std::sin(t) : 0.0;
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, kPi, 15, 1e-12, &error);
  if (!std::isfinite(value) || error > 1e-6 * std::abs(value)) {
    throw DomainError("WKB action quadrature did not converge");
  }
  return value / phys::kHbar;
}

TunnelingResult tunneling_rate(int level_index, const LevelStructure& levels,
                               const DeviceConfig& cfg) {
  if (level_index < 0) throw std::invalid_argument("level index must be non-negative");
  const auto energies = level_energies(levels, cfg, level_index + 1);
  TunnelingResult out;
  out.level_index = level_index;
  out.energy = energies.back();
  out.turning_points = turning_points(out.energy, cfg);
  out.action = action_integral(cfg, out.energy, out.turning_points.first,
                               out.turning_points.second);
  out.rate = levels.omega_p / kTwoPi * std::exp(-2.0 * out.action);
  return out;
}

TunnelingRates wkb_rates(const LevelStructure& levels, const DeviceConfig& cfg) {
  return {tunneling_rate(0, levels, cfg).rate, tunneling_rate(1, levels, cfg).rate,
          tunneling_rate(2, levels, cfg).rate};
}

double two_level_bias(const DeviceConfig& cfg) {
  DeviceConfig mode = cfg;
  mode.beta = cfg.beta_one_photon;
  const int count = bound_level_count(derive_levels(mode), mode);
  if (count != 2) {
    throw DomainError("one-photon mode bias " + std::to_string(mode.beta) + " admits " +
                      std::to_string(count) + " level(s), expected 2");
  }
  return mode.beta;
}

TunnelingResult one_photon_mode_rate(const DeviceConfig& cfg) {
  DeviceConfig mode = cfg;
  mode.beta = two_level_bias(cfg);
  return tunneling_rate(1, derive_levels(mode), mode);
}

}  // namespace jpm
