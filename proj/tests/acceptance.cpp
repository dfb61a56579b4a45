// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "jpmcount/constants.hpp"
#include "jpmcount/harness.hpp"
#include "jpmcount/liouville.hpp"
#include "jpmcount/rate_model.hpp"

using namespace jpm;

namespace {

DeviceConfig reference_device() {
  DeviceConfig cfg;
  cfg.C = 2e-12;
  cfg.I0 = 10e-6;
  cfg.beta = 0.97987;
  cfg.Gamma10 = 318e3;
  cfg.Gamma22 = 2.1e6;
  cfg.lambda2 = 0.1;
  return cfg;
}

DeviceModel reference_model() {
  TunnelingOverrides o;
  o.gamma0 = 37.0;
  o.gamma1 = 54e3;
  o.gamma2 = 41e6;
  o.gamma1_one_photon = 19e6;
  return build_device_model(reference_device(), o);
}

CouplingRates random_rates(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  CouplingRates r = with_lambda2(reference_model().rates, log_uniform(0.05, 0.12));
  r.Gamma10 = to_angular(log_uniform(100e3, 600e3));
  r.Gamma21 = 2.0 * r.Gamma10;
  r.Gamma22 = to_angular(log_uniform(0.5e6, 5e6));
  r.gamma2 = to_angular(log_uniform(20e6, 80e6));
  r.gamma1 = to_angular(log_uniform(20e3, 100e3));
  r.gamma0 = to_angular(log_uniform(10.0, 100.0));
  return r;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "!") + std::move(note));
  }
};

std::string pct(double p) { return fmt::format("{:.4f}%", 100.0 * p); }

Outcome structural() {
  Outcome o;
  const auto m = reference_model();
  const double delta = to_hz(m.levels.Delta) / 1e6;
  const double omega = to_hz(m.levels.omega) / 1e9;
  const double b20 = to_hz(absorption_rate(2, m.rates)) / 1e6;
  o.expect(std::abs(delta / 194.0 - 1) <= 0.01, fmt::format("Delta/2pi = {:.3f} MHz", delta));
  o.expect(std::abs(omega / 8.2 - 1) <= 0.01, fmt::format("omega/2pi = {:.4f} GHz", omega));
  o.expect(std::abs(b20 / 0.35 - 1) <= 0.05, fmt::format("B20/2pi = {:.4f} MHz", b20));
  const int nmax = n_max(m.rates);
  o.expect(nmax == 14, fmt::format("N_max = {}", nmax));
  o.notes.push_back(fmt::format("N_max at margin 1 = {}", n_max(m.rates, 1.0)));
  return o;
}

Outcome performance() {
  Outcome o;
  const auto r = reference_model().rates;
  const double t = optimal_time(r).t_opt;
  const double pf = p_false(t, r.gamma0);
  const double pb = p_bright(t, r).value;
  o.expect(std::abs(t / 4.2e-6 - 1) <= 0.05, fmt::format("t_opt = {:.4f} us", t * 1e6));
  o.expect(std::abs(100 * pf - 0.1) <= 0.02, "P_false = " + pct(pf));
  o.expect(std::abs(100 * pb - 98.6) <= 0.2, "P_bright = " + pct(pb));
  return o;
}

Outcome protocol() {
  Outcome o;
  const auto report = protocol_report(reference_model());
  o.expect(std::abs(100 * report.p_bright_01 - 98.3) <= 0.2,
           "P_bright(0/1) = " + pct(report.p_bright_01));
  o.expect(std::abs(100 * report.eps2 - 1.1) <= 0.2, "eps2 = " + pct(report.eps2));
  return o;
}

Outcome wkb() {
  Outcome o;
  const auto cfg = reference_device();
  const auto rates = wkb_rates(derive_levels(cfg), cfg);
  auto within = [](double x, double ref) { return x >= ref / 5 && x <= ref * 5; };
  const double g0 = to_hz(rates.gamma0), g1 = to_hz(rates.gamma1), g2 = to_hz(rates.gamma2);
  o.expect(within(g0, 37.0), fmt::format("gamma0/2pi = {:.4g} Hz", g0));
  o.expect(within(g1, 54e3), fmt::format("gamma1/2pi = {:.4g} Hz", g1));
  o.expect(within(g2, 41e6), fmt::format("gamma2/2pi = {:.4g} Hz", g2));
  o.expect(g1 / g0 > 1e2 && g2 / g1 > 1e2,
           fmt::format("hierarchy ratios {:.3g}, {:.3g}", g1 / g0, g2 / g1));
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto r = reference_model().rates;
  CrossCheckOptions opts;
  opts.n_fock = 6;
  const auto x = cross_check_rate_vs_lindblad(r, opts);
  o.expect(x.max_dev_closed_form <= 0.02,
           fmt::format("Lindblad vs P_bright formula {:.3f} pp", 100 * x.max_dev_closed_form));
  o.expect(x.max_dev_ode <= 0.02,
           fmt::format("Lindblad vs rate ODE {:.3f} pp", 100 * x.max_dev_ode));
  o.expect(!x.edge_flag, "Fock truncation edge clear");

  std::vector<double> t;
  const double stop = 3.0 * optimal_time(r).t_opt;
  for (int k = 1; k <= 1000; ++k) t.push_back(stop * k / 1000.0);
  const auto ode = integrate_rate_equations(RateSystemState::fock_input(2), r, t);
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    worst = std::max(worst, std::abs(ode[k].p_click - closed_form_click_probability(t[k], r)));
  }
  o.expect(worst <= 1e-6, fmt::format("Laplace closed form vs ODE {:.2e}", worst));
  return o;
}

Outcome perturbative_order() {
  Outcome o;
  const auto s = lambda_scaling_study(reference_model().rates, {0.025, 0.05, 0.1});
  o.expect(std::abs(s.hamiltonian_slope - 2.0) <= 0.2,
           fmt::format("Hamiltonian residual slope {:.3f}", s.hamiltonian_slope));
  o.expect(std::abs(s.dressed_slope - 2.0) <= 0.2,
           fmt::format("dressed dissipator residual slope {:.3f}", s.dressed_slope));
  return o;
}

Outcome invariants() {
  Outcome o;
  const auto r = reference_model().rates;
  const auto timing = optimal_time(r);

  // Full run of the bare Lindbladian in the rotating frame.
  const HilbertLayout layout(6);
  const auto L = build_lindbladian(r, layout, build_hamiltonian_rotating(r, layout));
  std::vector<double> t;
  for (int k = 1; k <= 50; ++k) t.push_back(2.0 * timing.t_opt * k / 50.0);
  const auto traj = evolve(JointState::basis(layout, level::kGround, 2), L, layout, t);
  double drift = 0.0, herm = 0.0, lowest = 0.0;
  for (const auto& s : traj.samples) {
    drift = std::max(drift, s.trace_deviation());
    herm = std::max(herm, s.hermiticity_error());
    lowest = std::min(lowest, s.min_eigenvalue());
  }
  o.expect(drift < 1e-7, fmt::format("trace drift {:.2e} over {} steps", drift, traj.steps));
  o.expect(herm < 1e-10, fmt::format("Hermiticity error {:.2e}", herm));
  o.expect(lowest > -1e-8, fmt::format("lowest eigenvalue {:.2e}", lowest));

  double leak = 0.0;
  for (int n = 0; n <= 6; ++n) {
    for (const auto& s : integrate_rate_equations(RateSystemState::fock_input(n), r, t)) {
      leak = std::max(leak, std::abs(s.total() - 1.0));
    }
  }
  o.expect(leak < 1e-9, fmt::format("rate-equation probability leak {:.2e}", leak));

  bool monotone = true;
  double pf = -1.0, pb = -1.0;
  for (int k = 0; k <= 400; ++k) {
    const double tk = 10e-6 * k / 400.0;
    const double f = p_false(tk, r.gamma0);
    const auto b = p_bright(tk, r);
    monotone = monotone && f >= pf;
    pf = f;
    if (b.valid) {
      monotone = monotone && b.value >= pb;
      pb = b.value;
    }
  }
  o.expect(monotone, "P_false and P_bright non-decreasing");

  std::mt19937_64 rng(2024);
  double worst = std::abs(discrimination_error(timing.t_opt, r).value / timing.eps_min - 1);
  for (int k = 0; k < 50; ++k) {
    const auto rr = random_rates(rng);
    const auto opt = optimal_time(rr);
    worst = std::max(worst, std::abs(discrimination_error(opt.t_opt, rr).value / opt.eps_min - 1));
  }
  o.expect(worst <= 0.02, fmt::format("eps(t_opt) vs eps_min worst {:.3f}%", 100 * worst));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"reference structural quantities", structural},
      {"reference performance figures", performance},
      {"two-step protocol", protocol},
      {"WKB tunneling rates", wkb},
      {"oracle equivalence", oracle_equivalence},
      {"perturbative order", perturbative_order},
      {"invariant suite", invariants},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("{} criterion {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", k + 1,
               criteria[k].first, seconds);
    for (const auto& note : o.notes) fmt::print("    {}\n", note);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
