// jpmcount: command-line front end for the JPM two-photon counting model.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "jpmcount/config.hpp"
#include "jpmcount/constants.hpp"
#include "jpmcount/harness.hpp"
#include "jpmcount/liouville.hpp"
#include "jpmcount/rate_model.hpp"
#include "jpmcount/report.hpp"
#include "jpmcount/semiclassics.hpp"

namespace fs = std::filesystem;
using namespace jpm;
using namespace jpm::cli;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAcceptance = 3;

struct Context {
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  std::optional<double> mleq_factor;
  std::optional<double> margin;
  RunConfig cfg;

  void load() {
    cfg = parse_config(config_path);
    if (mleq_factor) cfg.mleq_factor = *mleq_factor;
    if (margin) cfg.margin = *margin;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();
    fs::create_directories(cfg.out_dir);
  }

  fs::path artifact(const std::string& name) const { return fs::path(cfg.out_dir) / name; }
};

std::string fmt_num(double x) { return format_number(x); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Prints a report and stores it under the output directory.
void emit_report(const Context& ctx, const std::string& name, const std::string& text) {
  std::cout << text;
  write_text(ctx.artifact(name), text);
}

std::string level_label(int jpm) { return jpm == level::kMeasured ? "m" : std::to_string(jpm); }

DeviceModel model_of(const RunConfig& cfg) { return build_device_model(cfg.device, cfg.overrides); }

// ---- levels ----------------------------------------------------------------

int run_levels(Context& ctx) {
  const auto& d = ctx.cfg.device;
  const auto lv = derive_levels(d);
  const int bound = bound_level_count(lv, d);
  std::vector<std::vector<std::string>> rows{
      {"W_J", fmt_num(lv.WJ), "J"},
      {"W_C", fmt_num(lv.WC), "J"},
      {"omega_p/2pi", fmt_num(to_hz(lv.omega_p)), "Hz"},
      {"n0", fmt_num(lv.n0), ""},
      {"omega10/2pi", fmt_num(to_hz(lv.omega10)), "Hz"},
      {"omega20/2pi", fmt_num(to_hz(lv.omega20)), "Hz"},
      {"omega/2pi", fmt_num(to_hz(lv.omega)), "Hz"},
      {"Delta/2pi", fmt_num(to_hz(lv.Delta)), "Hz"},
      {"phi_min", fmt_num(lv.phi_min), "rad"},
      {"delta_max (cubic)", fmt_num(lv.delta_max), "rad"},
      {"barrier top - phi_min (exact)", fmt_num(barrier_top_phase(d) - lv.phi_min), "rad"},
      {"barrier height", fmt_num(barrier_height(d)), "J"},
      {"barrier height / hbar omega_p", fmt_num(barrier_height(d) / (phys::kHbar * lv.omega_p)), ""},
      {"bound levels", std::to_string(bound), ""},
  };
  for (int n = 0; n < bound; ++n) {
    rows.push_back({fmt::format("E_{} / hbar omega_p", n),
                    fmt_num(level_energy(lv, n) / (phys::kHbar * lv.omega_p)), ""});
  }
  emit_report(ctx, "levels.txt", render_table({"quantity", "value", "unit"}, rows));
  return 0;
}

// ---- wkb -------------------------------------------------------------------

int run_wkb(Context& ctx) {
  const auto& d = ctx.cfg.device;
  const auto lv = derive_levels(d);
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const std::string& mode, const TunnelingResult& r, const LevelStructure& levels) {
    rows.push_back({mode, std::to_string(r.level_index), fmt_num(r.energy),
                    fmt_num(r.energy / (phys::kHbar * levels.omega_p)),
                    fmt_num(r.turning_points.first), fmt_num(r.turning_points.second),
                    fmt_num(r.action), fmt_num(r.rate), fmt_num(to_hz(r.rate))});
  };
  for (int n = 0; n < 3; ++n) add("two-photon", tunneling_rate(n, lv, d), lv);
  std::string extra;
  try {
    DeviceConfig one = d;
    one.beta = two_level_bias(d);
    add("one-photon", one_photon_mode_rate(d), derive_levels(one));
  } catch (const DomainError& e) {
    extra = fmt::format("one-photon mode unavailable: {}\n", e.what());
  }
  emit_report(ctx, "wkb.txt",
              render_table({"mode", "level", "energy_J", "energy_hbar_wp", "phi_inner_rad",
                            "phi_outer_rad", "action_hbar", "rate_1/s", "rate/2pi_Hz"},
                           rows) +
                  extra);
  return 0;
}

// ---- rates -----------------------------------------------------------------

int run_rates(Context& ctx) {
  const auto model = model_of(ctx.cfg);
  const auto& r = model.rates;
  const auto one = one_photon_absorption_rate(r);
  auto hz = [](double w) { return fmt_num(to_hz(w)); };
  std::vector<std::vector<std::string>> rows{
      {"lambda1", fmt_num(r.lambda1), ""},
      {"lambda2", fmt_num(r.lambda2), ""},
      {"Delta/2pi", hz(r.Delta), "Hz"},
      {"g1/2pi", hz(r.g1), "Hz"},
      {"g2/2pi", hz(r.g2), "Hz"},
      {"g_tilde/2pi", hz(r.g_tilde), "Hz"},
      {"chi1/2pi", hz(r.chi1), "Hz"},
      {"chi2/2pi", hz(r.chi2), "Hz"},
      {"gamma0/2pi", hz(r.gamma0), "Hz"},
      {"gamma1/2pi", hz(r.gamma1), "Hz"},
      {"gamma2/2pi", hz(r.gamma2), "Hz"},
      {"Gamma10/2pi", hz(r.Gamma10), "Hz"},
      {"Gamma21/2pi", hz(r.Gamma21), "Hz"},
      {"Gamma11/2pi", hz(r.Gamma11), "Hz"},
      {"Gamma22/2pi", hz(r.Gamma22), "Hz"},
      {"tildeGamma1/2pi", hz(r.GammaT1()), "Hz"},
      {"tildeGamma2/2pi", hz(r.GammaT2()), "Hz"},
      {"d01/2pi", hz(r.d01()), "Hz"},
      {"d12/2pi", hz(r.d12()), "Hz"},
      {"d02/2pi", hz(r.d02()), "Hz"},
      {"B20/2pi", hz(absorption_rate(2, r)), "Hz"},
      {"B10/2pi", hz(one.b10), "Hz"},
      {"B20/B10", fmt_num(one.ratio), ""},
      {"branching product", fmt_num(branching_product(r)), ""},
      {fmt::format("N_max (margin {})", fmt_num(ctx.cfg.margin)),
       std::to_string(n_max(r, ctx.cfg.margin)), ""},
  };
  if (model.gamma1_one_photon) rows.push_back({"gamma1'/2pi", hz(*model.gamma1_one_photon), "Hz"});
  if (const auto circuit = circuit_couplings(model.cfg, model.levels)) {
    rows.push_back({"g1/2pi (circuit)", hz(circuit->first), "Hz"});
    rows.push_back({"g2/2pi (circuit)", hz(circuit->second), "Hz"});
  }
  emit_report(ctx, "rates.txt", render_table({"quantity", "value", "unit"}, rows));
  return 0;
}

// ---- simulate --------------------------------------------------------------

struct SimulateOptions {
  int photons = 2;
  std::string frame = "effective";
  bool dressed = false;
};

int run_simulate(Context& ctx, const SimulateOptions& opt) {
  const auto model = model_of(ctx.cfg);
  const HilbertLayout layout(ctx.cfg.n_fock);
  if (opt.photons < 0 || opt.photons >= layout.n_fock()) {
    throw std::invalid_argument("photon number must lie below n_fock");
  }
  const Operator H = opt.frame == "rotating" ? build_hamiltonian_rotating(model.rates, layout)
                                             : build_effective_hamiltonian(model.rates, layout);
  Superoperator L = build_lindbladian(model.rates, layout, H);
  if (opt.dressed) L = L + dressed_correction(model.rates, layout);
  const auto times = ctx.cfg.grid.values();
  const auto traj = evolve(JointState::basis(layout, level::kGround, opt.photons), L, layout, times);

  std::vector<std::string> header{"time_s", "p_click"};
  for (int j = 0; j < HilbertLayout::kJpmLevels; ++j) {
    for (int n = 0; n < layout.n_fock(); ++n) {
      header.push_back(fmt::format("p_{}_{}", level_label(j), n));
    }
  }
  header.push_back("trace_deviation");
  header.push_back("min_eigenvalue");
  std::ostringstream csv;
  CsvWriter w(csv, header);
  for (const auto& s : traj.samples) {
    std::vector<double> row{s.time, click_probability(s, layout)};
    for (int k = 0; k < layout.dim(); ++k) row.push_back(s.rho(k, k).real());
    row.push_back(s.trace_deviation());
    row.push_back(s.min_eigenvalue());
    w.row(row);
  }
  write_text(ctx.artifact("simulate.csv"), csv.str());
  std::cout << fmt::format("wrote {} ({} samples, {} steps, max edge population {})\n",
                           ctx.artifact("simulate.csv").string(), traj.samples.size(), traj.steps,
                           fmt_num(traj.max_edge_population));
  if (traj.edge_flag) {
    std::cout << "warning: truncation-edge Fock population exceeded 1e-6; increase n_fock\n";
  }
  return 0;
}

// ---- ratecurves ------------------------------------------------------------

int run_ratecurves(Context& ctx) {
  const auto model = model_of(ctx.cfg);
  const auto& r = model.rates;
  const auto times = ctx.cfg.grid.values();
  const auto curve = reproduce_fig4(r, times);
  const auto ode = integrate_rate_equations(RateSystemState::fock_input(2), r, times);
  std::ostringstream csv;
  CsvWriter w(csv, {"time_s", "p_false", "p_bright", "miss", "eps", "valid", "p_click_rate_ode",
                    "p_click_closed_form"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    w.row(std::vector<double>{times[k], p_false(times[k], r.gamma0), 1.0 - curve.miss[k],
                              curve.miss[k], curve.eps[k], curve.valid[k] ? 1.0 : 0.0,
                              ode[k].p_click, closed_form_click_probability(times[k], r)});
  }
  write_text(ctx.artifact("ratecurves.csv"), csv.str());
  const auto timing = optimal_time(r);
  std::cout << fmt::format(
      "wrote {}\n  grid argmin of eps: {} s\n  t_opt (closed form): {} s\n  branching floor: {}\n",
      ctx.artifact("ratecurves.csv").string(), fmt_num(curve.t_argmin), fmt_num(timing.t_opt),
      fmt_num(curve.branching_floor));
  return 0;
}

// ---- protocol / check ------------------------------------------------------

std::string validity_table(const std::vector<ValidityCheck>& checks) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : checks) {
    rows.push_back({c.name, fmt_num(c.ratio), fmt_num(c.threshold), c.pass ? "pass" : "FAIL"});
  }
  return render_table({"condition", "ratio", "threshold", "status"}, rows);
}

int run_protocol(Context& ctx) {
  const auto model = model_of(ctx.cfg);
  TwoStepOptions opts;
  opts.priors = ctx.cfg.priors;
  const auto rep = protocol_report(model, ctx.cfg.validity_options(), opts);
  std::vector<std::vector<std::string>> rows{
      {"t_opt", fmt_num(rep.t_opt), "s"},
      {"P_false(t_opt)", fmt_num(rep.p_false_at_topt), ""},
      {"P_bright(t_opt)", fmt_num(rep.p_bright_at_topt), ""},
      {"eps_min", fmt_num(rep.eps_min), ""},
      {"P_bright 0/1", fmt_num(rep.p_bright_01), ""},
      {"eps2", fmt_num(rep.eps2), ""},
      {"B20/2pi", fmt_num(to_hz(rep.b20)), "Hz"},
      {"B10/2pi", fmt_num(to_hz(rep.b10)), "Hz"},
  };
  emit_report(ctx, "protocol.txt",
              render_table({"quantity", "value", "unit"}, rows) + "\n" +
                  validity_table(rep.validity));
  return 0;
}

int run_check(Context& ctx, std::optional<double> time) {
  const auto model = model_of(ctx.cfg);
  const double t = time ? *time : optimal_time(model.rates).t_opt;
  const auto checks =
      validity_report(model.cfg, model.levels, model.rates, t, ctx.cfg.validity_options());
  emit_report(ctx, "check.txt",
              fmt::format("validity at t = {} s\n", fmt_num(t)) + validity_table(checks));
  const bool all = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  return all ? 0 : kExitDomain;
}

// ---- table1 ----------------------------------------------------------------

int run_table1(Context& ctx) {
  const auto model = model_of(ctx.cfg);
  const auto results = reproduce_table1(model, ctx.cfg.margin);
  std::vector<std::vector<std::string>> rows;
  bool all = true;
  auto kind = [](ToleranceKind k) {
    switch (k) {
      case ToleranceKind::kRelative: return "relative";
      case ToleranceKind::kPoints: return "points";
      case ToleranceKind::kFactor: return "factor";
      case ToleranceKind::kExact: return "exact";
    }
    return "";
  };
  for (const auto& r : results) {
    all = all && r.pass;
    rows.push_back({r.name, r.unit, fmt_num(r.reference), fmt_num(r.computed), fmt_num(r.deviation),
                    fmt_num(r.tolerance), kind(r.kind), r.pass ? "pass" : "FAIL"});
  }
  emit_report(ctx, "table1.txt",
              render_table({"quantity", "unit", "reference", "computed", "deviation", "tolerance",
                            "kind", "status"},
                           rows));
  return all ? 0 : kExitAcceptance;
}

// ---- sweep -----------------------------------------------------------------

struct SweepAxis {
  std::string field;
  double lo = 0.0;
  double hi = 0.0;
};

SweepAxis parse_axis(const std::string& field, const std::string& range) {
  const auto dots = range.find("..");
  if (dots == std::string::npos) throw CLI::ValidationError("range", "expected LO..HI, got " + range);
  SweepAxis axis{field, 0.0, 0.0};
  try {
    std::size_t used = 0;
    axis.lo = std::stod(range.substr(0, dots), &used);
    if (used != dots) throw std::invalid_argument(range);
    const std::string hi = range.substr(dots + 2);
    axis.hi = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(range);
  } catch (const std::exception&) {
    throw CLI::ValidationError("range", "expected LO..HI, got " + range);
  }
  const auto keys = numeric_keys();
  if (std::find(keys.begin(), keys.end(), field) == keys.end()) {
    throw CLI::ValidationError("field", "unknown sweep field " + field);
  }
  return axis;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int run_sweep(Context& ctx, const std::vector<std::string>& args, int points) {
  if (args.size() != 2 && args.size() != 4) {
    throw CLI::ValidationError("sweep", "expected FIELD LO..HI [FIELD2 LO..HI]");
  }
  if (points < 2) throw CLI::ValidationError("--points", "need at least 2 points");
  std::vector<SweepAxis> axes;
  for (std::size_t k = 0; k < args.size(); k += 2) axes.push_back(parse_axis(args[k], args[k + 1]));

  auto axis_value = [points](const SweepAxis& a, int k) {
    return a.lo + (a.hi - a.lo) * static_cast<double>(k) / (points - 1);
  };
  const std::size_t total = axes.size() == 1 ? points : static_cast<std::size_t>(points) * points;

  struct Row {
    std::vector<double> values;
    std::string status;
  };
  std::vector<Row> rows(total);
  std::atomic<std::size_t> next{0};

  auto evaluate = [&](std::size_t index) {
    RunConfig cfg = ctx.cfg;
    std::vector<double> coords;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const int k = a == 0 ? static_cast<int>(index % points) : static_cast<int>(index / points);
      const double v = axis_value(axes[a], k);
      coords.push_back(v);
      const auto& f = axes[a].field;
      // Junction parameters change the WKB rates, so tabulated rates no longer apply.
      if (f == "C" || f == "I0" || f == "beta") {
        cfg.overrides.gamma0.reset();
        cfg.overrides.gamma1.reset();
        cfg.overrides.gamma2.reset();
      }
      if (f == "C" || f == "I0" || f == "beta_one_photon") cfg.overrides.gamma1_one_photon.reset();
      set_numeric(cfg, f, v);
    }
    Row row;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.values = coords;
    std::vector<double> results(11, nan);
    try {
      cfg.validate();
      const auto model = model_of(cfg);
      const auto& r = model.rates;
      results[0] = to_hz(r.gamma0);
      results[1] = to_hz(r.gamma1);
      results[2] = to_hz(r.gamma2);
      results[3] = to_hz(absorption_rate(2, r));
      results[4] = n_max(r, cfg.margin);
      const auto timing = optimal_time(r);
      results[5] = timing.t_opt;
      results[6] = p_false(timing.t_opt, r.gamma0);
      results[7] = p_bright(timing.t_opt, r).value;
      results[8] = timing.eps_min;
      if (model.gamma1_one_photon) {
        TwoStepOptions opts;
        opts.priors = cfg.priors;
        const auto rep = two_step_error(r, *model.gamma1_one_photon, opts);
        results[9] = rep.p_bright_01;
        results[10] = rep.eps2;
        row.status = "ok";
      } else {
        row.status = "no one-photon mode";
      }
    } catch (const std::exception& e) {
      row.status = sanitize(e.what());
    }
    row.values.insert(row.values.end(), results.begin(), results.end());
    rows[index] = std::move(row);
  };

  const int jobs = std::max(1, ctx.jobs);
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < total; i = next++) evaluate(i);
    });
  }
  for (auto& t : pool) t.join();

  std::vector<std::string> header;
  for (const auto& a : axes) header.push_back(a.field);
  for (const char* h : {"gamma0_Hz", "gamma1_Hz", "gamma2_Hz", "B20_Hz", "N_max", "t_opt_s",
                        "p_false", "p_bright", "eps_min", "p_bright_01", "eps2", "status"}) {
    header.emplace_back(h);
  }
  std::ostringstream csv;
  CsvWriter w(csv, header);
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (double v : row.values) cells.push_back(fmt_num(v));
    cells.push_back(row.status);
    w.row(cells);
  }
  write_text(ctx.artifact("sweep.csv"), csv.str());
  std::cout << fmt::format("wrote {} ({} rows)\n", ctx.artifact("sweep.csv").string(), total);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JPM two-photon counting model"};
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  app.add_option("--config", ctx.config_path, "configuration file (key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", ctx.out_dir, "output directory (overrides out_dir)");
  app.add_option("--jobs", ctx.jobs, "worker threads for sweep")->check(CLI::PositiveNumber);
  app.add_option("--mleq-factor", ctx.mleq_factor, "ratio that counts as 'much less than'")
      ->check(CLI::PositiveNumber);
  app.add_option("--margin", ctx.margin, "N_max margin")->check(CLI::PositiveNumber);

  std::function<int()> action;
  app.add_subcommand("levels", "level structure of the well")->callback([&] {
    action = [&] { return run_levels(ctx); };
  });
  app.add_subcommand("wkb", "WKB tunneling rates")->callback([&] {
    action = [&] { return run_wkb(ctx); };
  });
  app.add_subcommand("rates", "couplings, rates, absorption rates and N_max")->callback([&] {
    action = [&] { return run_rates(ctx); };
  });

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "full Lindblad trajectory (CSV)");
  simulate->add_option("--photons", sim.photons, "initial Fock state of the resonator");
  simulate->add_option("--frame", sim.frame, "Hamiltonian: effective or rotating")
      ->check(CLI::IsMember({"effective", "rotating"}));
  simulate->add_flag("--dressed", sim.dressed, "add the first-order dressed dissipator");
  simulate->callback([&] { action = [&] { return run_simulate(ctx, sim); }; });

  app.add_subcommand("ratecurves", "P_false, P_bright and error curves (CSV)")->callback([&] {
    action = [&] { return run_ratecurves(ctx); };
  });
  app.add_subcommand("protocol", "two-step counting report")->callback([&] {
    action = [&] { return run_protocol(ctx); };
  });
  app.add_subcommand("table1", "compare against the reference parameter table")->callback([&] {
    action = [&] { return run_table1(ctx); };
  });

  std::optional<double> check_time;
  auto* check = app.add_subcommand("check", "validity conditions");
  check->add_option("--time", check_time, "measurement time in s (default t_opt)");
  check->callback([&] { action = [&] { return run_check(ctx, check_time); }; });

  std::vector<std::string> sweep_args;
  int sweep_points = 11;
  auto* sweep = app.add_subcommand("sweep", "grid over one or two config fields (CSV)");
  sweep->add_option("axes", sweep_args, "FIELD LO..HI [FIELD2 LO..HI]")->required();
  sweep->add_option("--points", sweep_points, "points per axis");
  sweep->callback([&] { action = [&] { return run_sweep(ctx, sweep_args, sweep_points); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    ctx.load();
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}
