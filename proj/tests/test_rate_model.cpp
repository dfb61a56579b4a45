#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "jpmcount/rate_model.hpp"
#include "support.hpp"

using namespace jpm;
using jpm::test::approx;
using jpm::test::rel;

namespace {

CouplingRates table_rates() { return test::reference_model().rates; }

std::vector<double> grid(double stop, int points) {
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) t[static_cast<std::size_t>(k)] = stop * (k + 1) / points;
  return t;
}

// Golden-section search for the minimum of a unimodal f on [lo, hi].
template <typename F>
double golden_section(F f, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  double fa = f(a), fb = f(b);
  for (int k = 0; k < 200 && hi - lo > 1e-12 * (std::abs(lo) + std::abs(hi)); ++k) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - g * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + g * (hi - lo);
      fb = f(b);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("absorption rates") {
  const auto r = table_rates();
  const double b20 = absorption_rate(2, r);
  CHECK(to_hz(b20) == approx(0.35e6, 0.05));
  CHECK(b20 == approx(8 * r.g_tilde * r.g_tilde / r.level2_width(), 1e-14));
  CHECK(absorption_rate(0, r) == 0.0);
  CHECK(absorption_rate(1, r) == 0.0);
  CHECK(absorption_rate(5, r) == approx(10.0 * b20, 1e-14));
  CHECK_THROWS_AS(absorption_rate(-1, r), std::invalid_argument);

  // With the level-2 width twice the level-1 width the ratio is lambda2^2.
  CouplingRates same = r;
  same.Gamma11 = 0.0;
  same.Gamma22 = 0.0;
  same.gamma1 = 0.5 * (r.gamma2 + r.Gamma21) - r.Gamma10;
  const auto one = one_photon_absorption_rate(same);
  CHECK(same.level2_width() == approx(2.0 * same.level1_width(), 1e-12));
  CHECK(one.ratio == approx(r.lambda2 * r.lambda2, 1e-9));
  CHECK(one.b10 == approx(4 * r.g1 * r.g1 / same.level1_width(), 1e-14));
}

TEST_CASE("false counts") {
  const double g0 = to_angular(37.0);
  CHECK(p_false(0.0, g0) == 0.0);
  CHECK(p_false(4.2e-6, g0) == approx(0.001, 0.03));
  CHECK(p_false(1e3, g0) == approx(1.0, 1e-12));
  CHECK_THROWS_AS(p_false(-1.0, g0), std::invalid_argument);
  double previous = -1.0;
  for (double t : grid(1e-3, 100)) {
    CHECK(p_false(t, g0) > previous);
    previous = p_false(t, g0);
  }
}

TEST_CASE("bright counts") {
  const auto r = table_rates();
  const auto at = p_bright(4.2e-6, r);
  CHECK(at.value == approx(0.986, 0.002));
  CHECK(at.valid);
  const auto start = p_bright(0.0, r);
  CHECK_FALSE(start.valid);
  CHECK(start.value == approx(-branching_product(r), 1e-12));
  CHECK(start.value == approx(-0.013, 0.05));
  CHECK(p_bright(0.9 * validity_onset(r), r).valid == false);
  CHECK(p_bright(validity_onset(r), r).valid);

  CouplingRates no_relax = r;
  no_relax.Gamma21 = 0.0;
  for (double t : {1e-7, 1e-6, 1e-5}) {
    CHECK(p_bright(t, no_relax).value == approx(1 - std::exp(-absorption_rate(2, no_relax) * t)));
  }

  double previous = -1.0;
  for (double t : grid(20e-6, 200)) {
    const auto p = p_bright(t, r);
    if (!p.valid) continue;
    CHECK(p.value >= previous);
    previous = p.value;
  }

  // More photons absorb faster.
  for (double t : grid(10e-6, 50)) {
    for (int n = 3; n <= 6; ++n) CHECK(p_bright(t, r, n).value > p_bright(t, r, 2).value);
  }
}

TEST_CASE("discrimination error") {
  const auto r = table_rates();
  const double x = branching_product(r);
  const auto opt = optimal_time(r);
  CHECK(opt.t_opt == approx(4.2e-6, 0.05));
  CHECK(opt.eps_min == approx(0.0071, 0.02));
  CHECK(rel(opt.t_numeric, opt.t_opt) < 0.02);
  const double u = golden_section(
      [&](double v) { return discrimination_error(v * opt.t_opt, r).value; }, 0.1, 3.0);
  CHECK(rel(opt.t_numeric, u * opt.t_opt) < 1e-6);
  CHECK(discrimination_error(opt.t_opt, r).value == approx(opt.eps_min, 0.02));

  const auto at0 = discrimination_error(0.0, r);
  CHECK_FALSE(at0.valid);
  CHECK(at0.value == approx(0.5 * (1 + 1 + (x - 1)), 1e-12));

  CouplingRates quiet = r;
  quiet.gamma0 = 0.0;
  CHECK(discrimination_error(1.0, quiet).value == approx(0.5 * x, 1e-12));
  CHECK_THROWS_AS(optimal_time(quiet), DomainError);

  DiscriminationPriors bad{0.6, 0.6};
  CHECK_THROWS_AS(discrimination_error(1e-6, r, bad), std::invalid_argument);
  DiscriminationPriors skew{0.2, 0.8};
  const double t = 3e-6;
  CHECK(discrimination_error(t, r, skew).value ==
        approx(0.2 * p_false(t, r.gamma0) + 0.8 * (1 - p_bright(t, r).value), 1e-14));
}

TEST_CASE("minimal error at the optimal time for random hierarchical rates") {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 50; ++k) {
    const auto r = test::random_hierarchical_rates(rng);
    const auto opt = optimal_time(r);
    CHECK(rel(discrimination_error(opt.t_opt, r).value, opt.eps_min) < 0.02);
    CHECK(opt.eps_numeric <= discrimination_error(opt.t_opt, r).value * (1 + 1e-12));
  }
}

TEST_CASE("rate equations") {
  const auto r = table_rates();

  SUBCASE("closed form matches the ODE") {
    const auto times = grid(10e-6, 1000);
    const auto traj = integrate_rate_equations(RateSystemState::fock_input(2), r, times);
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      worst = std::max(worst, std::abs(traj[k].p_click - closed_form_click_probability(times[k], r)));
      CHECK(std::abs(traj[k].total() - 1.0) < 1e-9);
    }
    CHECK(worst < 1e-6);
    // Approximate formula at the optimal time.
    CHECK(std::abs(closed_form_click_probability(4.2e-6, r) - p_bright(4.2e-6, r).value) < 0.005);
  }

  SUBCASE("random hierarchical rates") {
    std::mt19937_64 rng(1234);
    for (int set = 0; set < 50; ++set) {
      const auto rr = test::random_hierarchical_rates(rng);
      const auto times = grid(3.0 * optimal_time(rr).t_opt, 1000);
      const auto traj = integrate_rate_equations(RateSystemState::fock_input(2), rr, times);
      double worst = 0.0, leak = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        worst = std::max(worst,
                         std::abs(traj[k].p_click - closed_form_click_probability(times[k], rr)));
        leak = std::max(leak, std::abs(traj[k].total() - 1.0));
      }
      CHECK(worst < 1e-6);
      CHECK(leak < 1e-9);
    }
  }

  SUBCASE("tunneling from level 2 only") {
    CouplingRates bare = r;
    bare.Gamma21 = 0.0;
    bare.Gamma10 = 0.0;
    bare.gamma0 = 0.0;
    const double b = absorption_rate(2, bare);
    const double g2 = bare.gamma2;
    const auto times = grid(10e-6, 100);
    const auto traj = integrate_rate_equations(RateSystemState::fock_input(2), bare, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k];
      const double exact = 1 - (g2 * std::exp(-b * t) - b * std::exp(-g2 * t)) / (g2 - b);
      CHECK(std::abs(traj[k].p_click - exact) < 1e-9);
      CHECK(closed_form_click_probability(t, bare) == approx(exact, 1e-9));
      // Two-state limit once level 2 has emptied.
      if (t > 10.0 / g2) CHECK(std::abs(traj[k].p_click - (1 - std::exp(-b * t))) < 2 * b / g2);
    }
  }

  SUBCASE("larger ladders conserve probability") {
    const auto times = grid(5e-6, 50);
    for (int n = 0; n <= 6; ++n) {
      const auto traj = integrate_rate_equations(RateSystemState::fock_input(n), r, times);
      for (const auto& s : traj) CHECK(std::abs(s.total() - 1.0) < 1e-9);
      if (n < 2) {
        for (std::size_t k = 0; k < times.size(); ++k) {
          CHECK(traj[k].p_click == approx(p_false(times[k], r.gamma0), 1e-6));
        }
      }
    }
    const auto four = integrate_rate_equations(RateSystemState::fock_input(4), r, times);
    const auto two = integrate_rate_equations(RateSystemState::fock_input(2), r, times);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(four[k].p_click > two[k].p_click);
  }

  SUBCASE("coincident poles") {
    CouplingRates c = r;
    c.gamma1 = c.GammaT2() - c.Gamma10;
    CHECK_THROWS_AS(closed_form_click_probability(1e-6, c), DomainError);
  }

  SUBCASE("state labels") {
    RateSystemState s(2);
    CHECK_THROWS_AS(s.at(3, 0), std::out_of_range);
    CHECK_THROWS_AS(s.at(0, 3), std::out_of_range);
    const std::vector<double> backwards = {2e-6, 1e-6};
    CHECK_THROWS_AS(integrate_rate_equations(s, r, backwards), std::invalid_argument);
  }
}

TEST_CASE("final value of the Laplace-domain click probability") {
  // s P(s) at s -> 0, term by term.
  const auto r = table_rates();
  const double b = absorption_rate(2, r);
  const double d2 = r.GammaT2() * (b + r.gamma0);
  const double first = b * r.Gamma21 * r.Gamma10 / (r.GammaT1() * d2);
  const double second = r.gamma1 * b * r.Gamma21 / (r.GammaT1() * d2);
  const double third = (r.gamma0 * r.GammaT2() + r.gamma2 * b) / d2;
  CHECK(first + second + third == approx(1.0, 1e-12));
  // A numerator gamma0 (B20 + tildeGamma2) + gamma2 B20 would exceed one.
  const double alternative = (r.gamma0 * (b + r.GammaT2()) + r.gamma2 * b) / d2;
  CHECK(first + second + alternative - 1.0 == approx(r.gamma0 * b / d2, 1e-9));
  CHECK(first + second + alternative > 1.0);
  CHECK(closed_form_click_probability(1e3, r) == approx(1.0, 1e-12));
}

TEST_CASE("validity report") {
  const auto model = test::reference_model();
  const auto checks = validity_report(model.cfg, model.levels, model.rates, 4.2e-6);
  CHECK(checks.size() == 13);
  for (const auto& c : checks) {
    INFO(c.name << " ratio " << c.ratio << " threshold " << c.threshold);
    CHECK(c.pass);
    CHECK(c.pass == (c.ratio >= c.threshold));
  }

  ValidityOptions with_t;
  with_t.temperature = 0.02;
  CHECK(validity_report(model.cfg, model.levels, model.rates, 4.2e-6, with_t).size() == 14);

  auto find = [](const std::vector<ValidityCheck>& v, const std::string& prefix) {
    for (const auto& c : v) {
      if (c.name.rfind(prefix, 0) == 0) return c;
    }
    FAIL("missing check " << prefix);
    return ValidityCheck{};
  };
  ValidityOptions one;
  one.photon_number = 1;
  const auto strong = with_lambda2(model.rates, 0.5);
  CHECK_FALSE(find(validity_report(model.cfg, model.levels, strong, 4.2e-6, one), "lambda2^2 n").pass);

  const auto late = validity_report(model.cfg, model.levels, model.rates, 1.0);
  CHECK_FALSE(find(late, "t << 1/(gamma1").pass);
  CHECK(find(late, "t << 1/(gamma1").ratio ==
        approx(1.0 / (model.rates.gamma1 * model.rates.lambda1 * model.rates.lambda1), 1e-12));

  ValidityOptions strict;
  strict.factor = 1e6;
  const auto harsh = validity_report(model.cfg, model.levels, model.rates, 4.2e-6, strict);
  CHECK_FALSE(find(harsh, "gamma0 << gamma1").pass);
}

TEST_CASE("two-step protocol") {
  const auto r = table_rates();
  const double g1p = to_angular(19e6);
  CHECK(one_photon_bright(g1p, r.Gamma10) == approx(0.983, 0.002));
  CHECK_THROWS_AS(one_photon_bright(0.0, 0.0), DomainError);

  const auto report = two_step_error(r, g1p);
  CHECK(report.eps2 == approx(0.011, 0.2));
  CHECK(std::abs(report.eps2 - 0.011) < 0.002);
  CHECK(report.t_opt == approx(optimal_time(r).t_opt, 1e-12));
  const double pf = report.p_false_at_topt;
  const double pb = report.p_bright_at_topt;
  const double p01 = report.p_bright_01;
  // Uniform priors, grouped the other way round.
  const double regrouped = (1.0 - pb + (1.0 - p01) + pf * (1.0 + p01)) / 3.0;
  CHECK(report.eps2 == approx(regrouped, 1e-13));

  TwoStepOptions stage2;
  stage2.stage2_false_rate = r.gamma0;
  stage2.stage2_time = 1e-6;
  CHECK(two_step_error(r, g1p, stage2).eps2 > report.eps2);

  TwoStepOptions bad;
  bad.priors = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(two_step_error(r, g1p, bad), std::invalid_argument);

  // A perfect detector: no false counts, no relaxation, instant tunneling.
  CouplingRates ideal = r;
  ideal.Gamma21 = 0.0;
  ideal.Gamma10 = 0.0;
  ideal.gamma0 = 1e-12;
  const auto perfect = two_step_error(ideal, g1p);
  CHECK(perfect.eps2 < 1e-9);
}
