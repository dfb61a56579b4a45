#include "jpmcount/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>
#include <stdexcept>

#include "jpmcount/constants.hpp"
#include "jpmcount/liouville.hpp"

namespace jpm {

namespace {

double resolve_rate(const std::optional<double>& override_hz, const std::optional<TunnelingRates>& wkb,
                    double TunnelingRates::*field, const char* name) {
  if (override_hz) {
    if (!(*override_hz >= 0.0)) {
      throw std::invalid_argument(std::string(name) + " override must be non-negative");
    }
    return to_angular(*override_hz);
  }
  if (!wkb) throw DomainError(std::string(name) + " unavailable: fewer than three levels in the well");
  return (*wkb).*field;
}

Operator apply_jumps(std::span<const JumpOperator> jumps, const Operator& rho) {
  Operator out = Operator::Zero(rho.rows(), rho.cols());
  for (const auto& j : jumps) {
    if (j.rate == 0.0) continue;
    const Operator n = j.op.adjoint() * j.op;
    out += j.rate * (j.op * rho * j.op.adjoint() - 0.5 * (n * rho + rho * n));
  }
  return out;
}

double max_rate(const CouplingRates& r) {
  return std::max({r.gamma0, r.gamma1, r.gamma2, r.Gamma10, r.Gamma21, r.Gamma11, r.Gamma22});
}

}  // namespace

DeviceModel build_device_model(const DeviceConfig& cfg, const TunnelingOverrides& overrides) {
  cfg.validate();
  DeviceModel m;
  m.cfg = cfg;
  m.levels = derive_levels(cfg);
  m.rates = derive_couplings(m.levels, cfg);
  try {
    m.wkb = wkb_rates(m.levels, cfg);
  } catch (const DomainError&) {
    m.wkb.reset();
  }
  m.rates.gamma0 = resolve_rate(overrides.gamma0, m.wkb, &TunnelingRates::gamma0, "gamma0");
  m.rates.gamma1 = resolve_rate(overrides.gamma1, m.wkb, &TunnelingRates::gamma1, "gamma1");
  m.rates.gamma2 = resolve_rate(overrides.gamma2, m.wkb, &TunnelingRates::gamma2, "gamma2");
  if (overrides.gamma1_one_photon) {
    m.gamma1_one_photon = to_angular(*overrides.gamma1_one_photon);
  } else {
    try {
      m.gamma1_one_photon = one_photon_mode_rate(cfg).rate;
    } catch (const DomainError&) {
      m.gamma1_one_photon.reset();
    }
  }
  return m;
}

CouplingRates with_lambda2(const CouplingRates& rates, double lambda2) {
  CouplingRates r = rates;
  r.lambda2 = lambda2;
  r.g2 = lambda2 * r.Delta;
  r.g1 = r.g2 / std::sqrt(2.0);
  r.lambda1 = r.Delta != 0.0 ? r.g1 / r.Delta : 0.0;
  r.g_tilde = r.Delta != 0.0 ? r.g1 * r.g2 / r.Delta : 0.0;
  r.chi1 = r.Delta != 0.0 ? r.g1 * r.g1 / r.Delta : 0.0;
  r.chi2 = r.Delta != 0.0 ? r.g2 * r.g2 / r.Delta : 0.0;
  return r;
}

ReproductionResult compare(std::string name, std::string unit, double reference, double computed,
                           double tolerance, ToleranceKind kind) {
  ReproductionResult r;
  r.name = std::move(name);
  r.unit = std::move(unit);
  r.reference = reference;
  r.computed = computed;
  r.tolerance = tolerance;
  r.kind = kind;
  switch (kind) {
    case ToleranceKind::kRelative:
      r.deviation = std::abs(computed - reference) / std::abs(reference);
      break;
    case ToleranceKind::kPoints:
    case ToleranceKind::kExact:
      r.deviation = std::abs(computed - reference);
      break;
    case ToleranceKind::kFactor:
      r.deviation = computed > 0.0 && reference > 0.0
                        ? std::max(computed / reference, reference / computed)
                        : std::numeric_limits<double>::infinity();
      break;
  }
  r.pass = std::isfinite(r.deviation) && r.deviation <= tolerance;
  return r;
}

std::vector<ReproductionResult> reproduce_table1(const DeviceModel& model, double margin) {
  using K = ToleranceKind;
  std::vector<ReproductionResult> out;
  const auto& lv = model.levels;
  const auto& r = model.rates;
  out.push_back(compare("Delta/2pi", "MHz", 194.0, to_hz(lv.Delta) / 1e6, 0.01, K::kRelative));
  out.push_back(compare("omega/2pi", "GHz", 8.2, to_hz(lv.omega) / 1e9, 0.01, K::kRelative));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const TunnelingRates wkb = model.wkb.value_or(TunnelingRates{nan, nan, nan});
  out.push_back(compare("gamma0/2pi (WKB)", "Hz", 37.0, to_hz(wkb.gamma0), 5.0, K::kFactor));
  out.push_back(compare("gamma1/2pi (WKB)", "kHz", 54.0, to_hz(wkb.gamma1) / 1e3, 5.0, K::kFactor));
  out.push_back(compare("gamma2/2pi (WKB)", "MHz", 41.0, to_hz(wkb.gamma2) / 1e6, 5.0, K::kFactor));
  out.push_back(
      compare("B20/2pi", "MHz", 0.35, to_hz(absorption_rate(2, r)) / 1e6, 0.05, K::kRelative));
  out.push_back(compare("N_max", "", 14.0, n_max(r, margin), 0.0, K::kExact));
  const auto timing = optimal_time(r);
  out.push_back(compare("t_opt", "us", 4.2, timing.t_opt * 1e6, 0.05, K::kRelative));
  out.push_back(
      compare("P_false", "%", 0.1, 100.0 * p_false(timing.t_opt, r.gamma0), 0.02, K::kPoints));
  out.push_back(compare("P_bright", "%", 98.6, 100.0 * p_bright(timing.t_opt, r).value, 0.2,
                        K::kPoints));
  return out;
}

Fig4Curve reproduce_fig4(const CouplingRates& rates, const std::vector<double>& times) {
  Fig4Curve c;
  c.branching_floor = branching_product(rates);
  double best = std::numeric_limits<double>::infinity();
  for (double t : times) {
    const auto bright = p_bright(t, rates);
    const auto eps = discrimination_error(t, rates);
    c.t.push_back(t);
    c.miss.push_back(1.0 - bright.value);
    c.eps.push_back(eps.value);
    c.valid.push_back(bright.valid);
    if (bright.valid && eps.value < best) {
      best = eps.value;
      c.t_argmin = t;
    }
  }
  return c;
}

CrossCheckResult cross_check_rate_vs_lindblad(const CouplingRates& base,
                                              const CrossCheckOptions& options) {
  if (!(options.time_scale > 0.0)) throw std::invalid_argument("time_scale must be positive");
  if (options.points < 2) throw std::invalid_argument("need at least 2 grid points");
  CouplingRates r = base;
  r.gamma2 *= options.tilde_gamma2_scale;
  r.Gamma21 *= options.tilde_gamma2_scale;
  r.g_tilde *= options.coupling_scale;
  r = time_scaled(r, options.time_scale);

  // The grid follows the unscaled-coupling optimum so the decoupled probe
  // still samples the same window.
  CouplingRates timing_rates = r;
  timing_rates.g_tilde = base.g_tilde * options.time_scale;
  const double t_opt = optimal_time(timing_rates).t_opt;

  CrossCheckResult out;
  for (int k = 0; k < options.points; ++k) {
    out.t.push_back(t_opt * (0.1 + 0.9 * k / (options.points - 1)));
  }
  const double b20 = absorption_rate(2, r);
  out.width_over_b20 = b20 > 0.0 ? r.level2_width() / b20 : std::numeric_limits<double>::infinity();

  const HilbertLayout layout(options.n_fock);
  const Superoperator L =
      build_lindbladian(r, layout, build_effective_hamiltonian(r, layout));
  EvolveOptions evo;
  evo.rel_tol = options.rel_tol;
  evo.abs_tol = options.abs_tol;
  const auto traj = evolve(JointState::basis(layout, level::kGround, 2), L, layout, out.t, evo);
  out.edge_flag = traj.edge_flag;
  out.steps = traj.steps;

  const auto ode = integrate_rate_equations(RateSystemState::fock_input(2), r, out.t);
  for (std::size_t k = 0; k < out.t.size(); ++k) {
    out.lindblad.push_back(click_probability(traj.samples[k], layout));
    out.rate_ode.push_back(ode[k].p_click);
    out.closed_form.push_back(p_bright(out.t[k], r).value);
    out.max_dev_ode = std::max(out.max_dev_ode, std::abs(out.lindblad[k] - out.rate_ode[k]));
    out.max_dev_closed_form =
        std::max(out.max_dev_closed_form, std::abs(out.lindblad[k] - out.closed_form[k]));
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("slope needs at least two paired points");
  }
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) {
      throw std::invalid_argument("log-log slope needs positive values");
    }
    mx += std::log(x[k]) / n;
    my += std::log(y[k]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("slope needs distinct abscissae");
  return sxy / sxx;
}

LambdaScalingResult lambda_scaling_study(const CouplingRates& rates,
                                         const std::vector<double>& lambdas,
                                         const LambdaScalingOptions& options) {
  if (lambdas.size() < 2) throw std::invalid_argument("need at least two lambda values");
  for (double l : lambdas) {
    if (!(l > 0.0 && l <= 0.2)) throw std::invalid_argument("lambda values must lie in (0, 0.2]");
  }
  if (options.n_fock < 5) throw std::invalid_argument("n_fock must be at least 5");

  const HilbertLayout layout(options.n_fock);
  const int dim = layout.dim();
  const int nf = layout.n_fock();

  // Random Hermitian test state with the two top Fock levels empty.
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Operator rho(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) rho(i, j) = Complex(normal(rng), normal(rng));
  }
  rho = (rho + rho.adjoint()).eval();
  for (int k = 0; k < dim; ++k) {
    if (layout.fock_of(k) >= nf - 2) {
      rho.row(k).setZero();
      rho.col(k).setZero();
    }
  }
  auto interior = [&](int k) { return layout.fock_of(k) <= nf - 4; };

  // |2> phase convention of the effective Hamiltonian.
  const Operator Z = Operator::Identity(dim, dim) - 2.0 * jpm_projector(layout, 2, 2);

  LambdaScalingResult out;
  out.lambdas = lambdas;
  const double scale = max_rate(rates);
  for (double lambda : lambdas) {
    const CouplingRates r = with_lambda2(rates, lambda);
    const Operator U = schrieffer_wolff_unitary(r, layout);

    const Operator h_diff = U.adjoint() * build_hamiltonian_rotating(r, layout) * U -
                            Z * build_effective_hamiltonian(r, layout) * Z;
    double h_res = 0.0;
    for (int i = 0; i < dim; ++i) {
      if (!layout.in_complete_block(i)) continue;
      for (int j = 0; j < dim; ++j) {
        if (layout.in_complete_block(j)) h_res = std::max(h_res, std::abs(h_diff(i, j)));
      }
    }
    out.hamiltonian_residual_raw.push_back(h_res);
    out.hamiltonian_residual.push_back(h_res / r.g2);

    const auto bare = bare_jump_operators(r, layout);
    const auto dressed = transformed_jump_operators(bare, U, JumpFrame::kConjugated);
    const Operator exact = apply_jumps(dressed, rho) - apply_jumps(bare, rho);
    const Operator d_diff = exact - apply_dressed_correction(r, layout, rho);
    double d_res = 0.0;
    for (int i = 0; i < dim; ++i) {
      if (!interior(i)) continue;
      for (int j = 0; j < dim; ++j) {
        if (interior(j)) d_res = std::max(d_res, std::abs(d_diff(i, j)));
      }
    }
    out.dressed_residual.push_back(d_res / scale);
  }
  out.hamiltonian_slope = loglog_slope(out.lambdas, out.hamiltonian_residual);
  out.hamiltonian_raw_slope = loglog_slope(out.lambdas, out.hamiltonian_residual_raw);
  out.dressed_slope = loglog_slope(out.lambdas, out.dressed_residual);
  return out;
}

DetectionReport protocol_report(const DeviceModel& model, const ValidityOptions& validity,
                                const TwoStepOptions& options) {
  if (!model.gamma1_one_photon) {
    throw DomainError("one-photon mode tunneling rate unavailable (set gamma1_one_photon)");
  }
  DetectionReport report = two_step_error(model.rates, *model.gamma1_one_photon, options);
  report.validity = validity_report(model.cfg, model.levels, model.rates, report.t_opt, validity);
  return report;
}

}  // namespace jpm
