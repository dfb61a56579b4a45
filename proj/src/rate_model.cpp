#include "jpmcount/rate_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <stdexcept>

#include "jpmcount/constants.hpp"

namespace jpm {

namespace {

constexpr int kJpmRateLevels = 3;

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("time must be >= 0");
}

}  // namespace

double absorption_rate(int photons, const CouplingRates& rates) {
  if (photons < 0) throw std::invalid_argument("photon number must be non-negative");
  const double n = static_cast<double>(photons);
  const double width = rates.level2_width();
  if (n * (n - 1.0) == 0.0 || rates.g_tilde == 0.0) return 0.0;
  if (!(width > 0.0)) throw DomainError("two-photon absorption needs a positive level-2 width");
  return 4.0 * rates.g_tilde * rates.g_tilde * n * (n - 1.0) / width;
}

OnePhotonAbsorption one_photon_absorption_rate(const CouplingRates& rates) {
  OnePhotonAbsorption out;
  if (rates.g1 == 0.0) return out;
  const double width = rates.level1_width();
  if (!(width > 0.0)) throw DomainError("one-photon absorption needs a positive level-1 width");
  out.b10 = 4.0 * rates.g1 * rates.g1 / width;
  out.ratio = absorption_rate(2, rates) / out.b10;
  return out;
}

double p_false(double t, double gamma0) {
  require_time(t);
  return -std::expm1(-gamma0 * t);
}

double branching_product(const CouplingRates& rates) {
  const double t2 = rates.GammaT2();
  const double t1 = rates.GammaT1();
  if (rates.Gamma21 == 0.0 || rates.Gamma10 == 0.0) return 0.0;
  return (rates.Gamma21 / t2) * (rates.Gamma10 / t1);
}

double validity_onset(const CouplingRates& rates) {
  const double width = rates.level2_width();
  return width > 0.0 ? 5.0 / width : std::numeric_limits<double>::infinity();
}

FlaggedProbability p_bright(double t, const CouplingRates& rates, int photons) {
  require_time(t);
  const double b = absorption_rate(photons, rates);
  FlaggedProbability out;
  out.value = 1.0 - std::exp(-b * t) - branching_product(rates) * std::exp(-rates.gamma0 * t);
  out.valid = t >= validity_onset(rates);
  return out;
}

void DiscriminationPriors::validate() const {
  if (!(dark >= 0.0 && bright >= 0.0) || std::abs(dark + bright - 1.0) > 1e-12) {
    throw std::invalid_argument("priors must be non-negative and sum to 1");
  }
}

FlaggedProbability discrimination_error(double t, const CouplingRates& rates,
                                        const DiscriminationPriors& priors) {
  priors.validate();
  const auto bright = p_bright(t, rates);
  FlaggedProbability out;
  out.value = priors.dark * p_false(t, rates.gamma0) + priors.bright * (1.0 - bright.value);
  out.valid = bright.valid;
  return out;
}

OptimalTime optimal_time(const CouplingRates& rates) {
  const double b20 = absorption_rate(2, rates);
  const double g0 = rates.gamma0;
  if (!(g0 > 0.0) || !(b20 > g0)) {
    throw DomainError(fmt::format("optimal time needs B20 > gamma0 > 0 (B20 = {:.6g}/s, "
                                  "gamma0 = {:.6g}/s)",
                                  b20, g0));
  }
  OptimalTime out;
  const double log_ratio = std::log(b20 / g0);
  out.t_opt = log_ratio / b20;
  out.eps_min = g0 / (2.0 * b20) * (1.0 + log_ratio) + 0.5 * branching_product(rates);

  // Search in units of t_opt: Brent's tolerance has an absolute floor in x.
  auto eps = [&](double u) { return discrimination_error(u * out.t_opt, rates).value; };
  const auto [u_best, e_best] = boost::math::tools::brent_find_minima(
      eps, 0.0, 20.0, std::numeric_limits<double>::digits / 2);
  out.t_numeric = u_best * out.t_opt;
  out.eps_numeric = e_best;
  return out;
}

RateSystemState::RateSystemState(int max_photons)
    : max_photons_(max_photons),
      occupations_(static_cast<std::size_t>((max_photons + 1) * kJpmRateLevels), 0.0) {
  if (max_photons < 0) throw std::invalid_argument("photon number must be non-negative");
}

RateSystemState RateSystemState::fock_input(int photons) {
  RateSystemState s(photons);
  s.at(photons, 0) = 1.0;
  return s;
}

double& RateSystemState::at(int fock, int jpm) {
  if (fock < 0 || fock > max_photons_ || jpm < 0 || jpm >= kJpmRateLevels) {
    throw std::out_of_range("rate-state label out of range");
  }
  return occupations_[static_cast<std::size_t>(fock * kJpmRateLevels + jpm)];
}

double RateSystemState::at(int fock, int jpm) const {
  return const_cast<RateSystemState&>(*this).at(fock, jpm);
}

double RateSystemState::total() const {
  double sum = p_click;
  for (double p : occupations_) sum += p;
  return sum;
}

std::vector<RateSystemState> integrate_rate_equations(const RateSystemState& initial,
                                                      const CouplingRates& rates,
                                                      std::span<const double> times,
                                                      double tolerance) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;

  const int top = initial.max_photons();
  const int n = (top + 1) * kJpmRateLevels + 1;
  const int click = n - 1;
  auto idx = [](int fock, int jpm) { return fock * kJpmRateLevels + jpm; };

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const std::array<double, kJpmRateLevels> tunnel{rates.gamma0, rates.gamma1, rates.gamma2};
  for (int f = 0; f <= top; ++f) {
    const double b = absorption_rate(f, rates);
    // |f,0>: loses to absorption and false counts, fed by 1 -> 0 relaxation.
    M(idx(f, 0), idx(f, 0)) -= b + rates.gamma0;
    M(idx(f, 0), idx(f, 1)) += rates.Gamma10;
    if (f >= 2) M(idx(f - 2, 2), idx(f, 0)) += b;
    // |f,1>: loses tildeGamma1, fed by 2 -> 1 relaxation.
    M(idx(f, 1), idx(f, 1)) -= rates.GammaT1();
    M(idx(f, 1), idx(f, 2)) += rates.Gamma21;
    M(idx(f, 2), idx(f, 2)) -= rates.GammaT2();
    for (int j = 0; j < kJpmRateLevels; ++j) M(click, idx(f, j)) += tunnel[j];
  }

  auto rhs = [&M](const State& x, State& dxdt, double /*t*/) {
    Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> out(dxdt.data(), static_cast<Eigen::Index>(dxdt.size()));
    out.noalias() = M * in;
  };

  State x(static_cast<std::size_t>(n));
  std::copy(initial.occupations().begin(), initial.occupations().end(), x.begin());
  x[static_cast<std::size_t>(click)] = initial.p_click;

  const double fastest = M.diagonal().cwiseAbs().maxCoeff();
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(tolerance, tolerance);
  std::vector<RateSystemState> out;
  out.reserve(times.size());
  double t = initial.time;
  for (const double target : times) {
    if (!(target >= t)) throw std::invalid_argument("sample times must be ascending");
    if (target > t) {
      const double dt0 = fastest > 0.0 ? std::min(0.1 / fastest, target - t) : target - t;
      odeint::integrate_adaptive(stepper, rhs, x, t, target, dt0);
      t = target;
    }
    RateSystemState s(top);
    std::copy(x.begin(), x.end() - 1, s.occupations().begin());
    s.p_click = x.back();
    s.time = target;
    out.push_back(std::move(s));
  }
  return out;
}

double closed_form_click_probability(double t, const CouplingRates& rates) {
  require_time(t);
  const double b20 = absorption_rate(2, rates);
  // Sequential chain k_1 -> k_2 -> k_3 -> k_4 with feeding rates c_i; each
  // occupation is a sum of residues at the poles -k_j of its transform.
  const std::array<double, 4> k{b20 + rates.gamma0, rates.GammaT2(), rates.GammaT1(),
                                rates.gamma0};
  const std::array<double, 3> c{b20, rates.Gamma21, rates.Gamma10};
  double remaining = 0.0;
  double feed = 1.0;
  for (int m = 0; m < 4; ++m) {
    if (m > 0) feed *= c[static_cast<std::size_t>(m - 1)];
    if (feed == 0.0) break;  // nothing reaches this stage or later ones
    double occupation = 0.0;
    for (int j = 0; j <= m; ++j) {
      double denom = 1.0;
      for (int i = 0; i <= m; ++i) {
        if (i == j) continue;
        const double gap = k[static_cast<std::size_t>(i)] - k[static_cast<std::size_t>(j)];
        const double scale = std::max(std::abs(k[static_cast<std::size_t>(i)]),
                                      std::abs(k[static_cast<std::size_t>(j)]));
        if (std::abs(gap) <= 1e-12 * scale) {
          throw DomainError("coincident poles in the closed-form click probability");
        }
        denom *= gap;
      }
      occupation += std::exp(-k[static_cast<std::size_t>(j)] * t) / denom;
    }
    remaining += feed * occupation;
  }
  return 1.0 - remaining;
}

std::vector<ValidityCheck> validity_report(const DeviceConfig& cfg, const LevelStructure& levels,
                                           const CouplingRates& rates, double t,
                                           const ValidityOptions& options) {
  require_time(t);
  const double f = options.factor;
  std::vector<ValidityCheck> out;
  auto add = [&out](std::string name, double ratio, double threshold) {
    out.push_back({std::move(name), ratio, threshold, ratio >= threshold});
  };
  auto ratio_of = [](double big, double small) {
    if (small == 0.0) return big > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return big / small;
  };

  const double w1 = rates.level1_width();
  const double w2 = rates.level2_width();
  const double b20 = absorption_rate(2, rates);
  const int n = options.photon_number;

  add(fmt::format("lambda2^2 n << 1 (n = {})", n),
      ratio_of(1.0, rates.lambda2 * rates.lambda2 * n), f);
  add("tildeGamma1 + Gamma11 >> 1/t", w1 * t, f);
  add("tildeGamma2 + Gamma22 >> tildeGamma1", ratio_of(w2, rates.GammaT1()), f);
  add("tildeGamma2 + Gamma22 >> 1/t", w2 * t, f);
  add("gamma0 << gamma1", ratio_of(rates.gamma1, rates.gamma0), f);
  add("gamma1 << gamma2", ratio_of(rates.gamma2, rates.gamma1), f);
  add(fmt::format("B_{{{},{}}} << tildeGamma2 + Gamma22", n, n - 2),
      ratio_of(w2, absorption_rate(n, rates)), f);
  const int nmax = n_max(rates, options.margin);
  add(fmt::format("chi2 N_max << tildeGamma2 + Gamma22 (N_max = {})", nmax),
      ratio_of(w2, rates.chi2 * nmax), 1.0 / options.margin);
  add("gamma0 << B20", ratio_of(b20, rates.gamma0), f);
  add("B20 << tildeGamma2", ratio_of(rates.GammaT2(), b20), f);
  add("t << 1/(gamma1 lambda1^2)", ratio_of(1.0, rates.gamma1 * rates.lambda1 * rates.lambda1 * t),
      f);
  add("omega_p << gap", ratio_of(cfg.gap_frequency, to_hz(levels.omega_p)), options.gap_factor);
  add("tildeGamma1 + Gamma11 << Delta", ratio_of(rates.Delta, w1), f);
  if (options.temperature) {
    add("hbar omega_p >> k_B T",
        ratio_of(phys::kHbar * levels.omega_p, phys::kBoltzmann * *options.temperature), f);
  }
  return out;
}

void ProtocolPriors::validate() const {
  if (!(p0 >= 0.0 && p1 >= 0.0 && p2 >= 0.0) || std::abs(p0 + p1 + p2 - 1.0) > 1e-12) {
    throw std::invalid_argument("priors must be non-negative and sum to 1");
  }
}

double one_photon_bright(double gamma1_one_photon, double Gamma10) {
  const double total = Gamma10 + gamma1_one_photon;
  if (!(total > 0.0)) throw DomainError("one-photon mode needs gamma1' + Gamma10 > 0");
  return gamma1_one_photon / total;
}

DetectionReport two_step_error(const CouplingRates& rates, double gamma1_one_photon,
                               const TwoStepOptions& options) {
  options.priors.validate();
  const auto timing = optimal_time(rates);
  DetectionReport r;
  r.t_opt = timing.t_opt;
  r.eps_min = timing.eps_min;
  r.b20 = absorption_rate(2, rates);
  CouplingRates one_photon = rates;
  one_photon.gamma1 = gamma1_one_photon;
  r.b10 = one_photon_absorption_rate(one_photon).b10;
  r.p_false_at_topt = p_false(r.t_opt, rates.gamma0);
  r.p_bright_at_topt = p_bright(r.t_opt, rates).value;
  r.p_bright_01 = one_photon_bright(gamma1_one_photon, rates.Gamma10);

  const double pf = r.p_false_at_topt;
  const double p01 = r.p_bright_01;
  double pf2 = 0.0;
  if (options.stage2_false_rate) pf2 = p_false(options.stage2_time, *options.stage2_false_rate);
  const auto& pr = options.priors;
  // Vacuum: a stage-1 false count, or a stage-2 one.
  // One photon: a stage-1 false count, or no click in stage 2.
  // Two photons: no click in stage 1.
  r.eps2 = pr.p0 * (pf + (1.0 - pf) * pf2) + pr.p1 * (pf + (1.0 - pf) * (1.0 - p01)) +
           pr.p2 * (1.0 - r.p_bright_at_topt);
  return r;
}

}  // namespace jpm
