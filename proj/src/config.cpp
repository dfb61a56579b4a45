#include "jpmcount/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace jpm::cli {

namespace {

struct NumericField {
  const char* key;
  std::function<void(RunConfig&, double)> set;
  std::function<double(const RunConfig&)> get;
};

int as_count(double v, std::string_view key) {
  if (!(v == std::floor(v)) || std::abs(v) > 1e9) {
    throw ConfigError(fmt::format("{} must be an integer", key));
  }
  return static_cast<int>(v);
}

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

const std::vector<NumericField>& fields() {
  static const std::vector<NumericField> table = [] {
    std::vector<NumericField> t;
    auto plain = [&t](const char* key, double DeviceConfig::*member) {
      t.push_back({key, [member](RunConfig& c, double v) { c.device.*member = v; },
                   [member](const RunConfig& c) { return c.device.*member; }});
    };
    plain("C", &DeviceConfig::C);
    plain("I0", &DeviceConfig::I0);
    plain("beta", &DeviceConfig::beta);
    plain("Cres", &DeviceConfig::Cres);
    plain("Lres", &DeviceConfig::Lres);
    plain("Ccoup", &DeviceConfig::Ccoup);
    plain("lambda2", &DeviceConfig::lambda2);
    plain("Gamma10", &DeviceConfig::Gamma10);
    plain("Gamma22", &DeviceConfig::Gamma22);
    plain("Gamma11", &DeviceConfig::Gamma11);
    t.push_back({"Gamma21", [](RunConfig& c, double v) { c.device.Gamma21 = v; },
                 [](const RunConfig& c) { return c.device.Gamma21.value_or(kUnset); }});
    plain("gap_frequency", &DeviceConfig::gap_frequency);
    plain("beta_one_photon", &DeviceConfig::beta_one_photon);

    auto optional = [&t](const char* key, std::optional<double> TunnelingOverrides::*member) {
      t.push_back({key, [member](RunConfig& c, double v) { c.overrides.*member = v; },
                   [member](const RunConfig& c) { return (c.overrides.*member).value_or(kUnset); }});
    };
    optional("gamma0", &TunnelingOverrides::gamma0);
    optional("gamma1", &TunnelingOverrides::gamma1);
    optional("gamma2", &TunnelingOverrides::gamma2);
    optional("gamma1_one_photon", &TunnelingOverrides::gamma1_one_photon);

    t.push_back({"n_fock", [](RunConfig& c, double v) { c.n_fock = as_count(v, "n_fock"); },
                 [](const RunConfig& c) { return double(c.n_fock); }});
    t.push_back({"t_start", [](RunConfig& c, double v) { c.grid.start = v; },
                 [](const RunConfig& c) { return c.grid.start; }});
    t.push_back({"t_stop", [](RunConfig& c, double v) { c.grid.stop = v; },
                 [](const RunConfig& c) { return c.grid.stop; }});
    t.push_back({"t_points", [](RunConfig& c, double v) { c.grid.points = as_count(v, "t_points"); },
                 [](const RunConfig& c) { return double(c.grid.points); }});
    t.push_back({"margin", [](RunConfig& c, double v) { c.margin = v; },
                 [](const RunConfig& c) { return c.margin; }});
    t.push_back({"mleq_factor", [](RunConfig& c, double v) { c.mleq_factor = v; },
                 [](const RunConfig& c) { return c.mleq_factor; }});
    t.push_back({"gap_factor", [](RunConfig& c, double v) { c.gap_factor = v; },
                 [](const RunConfig& c) { return c.gap_factor; }});
    t.push_back({"temperature", [](RunConfig& c, double v) { c.temperature = v; },
                 [](const RunConfig& c) { return c.temperature.value_or(kUnset); }});
    t.push_back({"photon_number",
                 [](RunConfig& c, double v) { c.photon_number = as_count(v, "photon_number"); },
                 [](const RunConfig& c) { return double(c.photon_number); }});
    t.push_back({"prior0", [](RunConfig& c, double v) { c.priors.p0 = v; },
                 [](const RunConfig& c) { return c.priors.p0; }});
    t.push_back({"prior1", [](RunConfig& c, double v) { c.priors.p1 = v; },
                 [](const RunConfig& c) { return c.priors.p1; }});
    t.push_back({"prior2", [](RunConfig& c, double v) { c.priors.p2 = v; },
                 [](const RunConfig& c) { return c.priors.p2; }});
    return t;
  }();
  return table;
}

const NumericField* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

void TimeGrid::validate() const {
  if (points < 2) throw ConfigError("t_points must be at least 2");
  if (!(start >= 0.0) || !(stop > start)) throw ConfigError("t_start and t_stop must satisfy 0 <= t_start < t_stop");
  if (spacing == Spacing::kLog && !(start > 0.0)) {
    throw ConfigError("t_start must be positive for log spacing");
  }
}

std::vector<double> TimeGrid::values() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double u = static_cast<double>(k) / (points - 1);
    out[static_cast<std::size_t>(k)] =
        spacing == Spacing::kLinear ? start + (stop - start) * u
                                    : start * std::pow(stop / start, u);
  }
  out.back() = stop;
  return out;
}

void RunConfig::validate() const {
  try {
    device.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(n_fock >= 3, "n_fock must be at least 3");
  grid.validate();
  require(margin > 0.0, "margin must be positive");
  require(mleq_factor > 0.0, "mleq_factor must be positive");
  require(gap_factor > 0.0, "gap_factor must be positive");
  require(!temperature || *temperature > 0.0, "temperature must be positive");
  require(photon_number >= 0, "photon_number must be non-negative");
  for (const auto& [v, name] : {std::pair{overrides.gamma0, "gamma0"},
                                std::pair{overrides.gamma1, "gamma1"},
                                std::pair{overrides.gamma2, "gamma2"},
                                std::pair{overrides.gamma1_one_photon, "gamma1_one_photon"}}) {
    if (v && !(*v >= 0.0)) throw ConfigError(fmt::format("{} must be non-negative", name));
  }
  try {
    priors.validate();
  } catch (const std::invalid_argument&) {
    throw ConfigError("prior0, prior1, prior2 must be non-negative and sum to 1");
  }
}

ValidityOptions RunConfig::validity_options() const {
  ValidityOptions v;
  v.factor = mleq_factor;
  v.margin = margin;
  v.gap_factor = gap_factor;
  v.temperature = temperature;
  v.photon_number = photon_number;
  return v;
}

const std::vector<std::string>& required_keys() {
  static const std::vector<std::string> keys{"C", "I0", "beta", "lambda2", "Gamma10", "Gamma22"};
  return keys;
}

std::vector<std::string> numeric_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

void set_numeric(RunConfig& cfg, std::string_view key, double value) {
  const auto* f = find_field(key);
  if (!f) throw ConfigError(fmt::format("unknown numeric key '{}'", key));
  f->set(cfg, value);
}

double get_numeric(const RunConfig& cfg, std::string_view key) {
  const auto* f = find_field(key);
  if (!f) throw ConfigError(fmt::format("unknown numeric key '{}'", key));
  return f->get(cfg);
}

RunConfig parse_config_text(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    if (!seen.insert(key).second) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, line_no, key));
    }
    if (key == "t_spacing") {
      if (value == "linear") {
        cfg.grid.spacing = Spacing::kLinear;
      } else if (value == "log") {
        cfg.grid.spacing = Spacing::kLog;
      } else {
        throw ConfigError(fmt::format("{}:{}: t_spacing must be 'linear' or 'log'", origin, line_no));
      }
    } else if (key == "out_dir") {
      cfg.out_dir = std::string(value);
    } else if (const auto* f = find_field(key)) {
      const auto number = parse_double(value);
      if (!number) {
        throw ConfigError(fmt::format("{}:{}: '{}' is not a number", origin, line_no, value));
      }
      try {
        f->set(cfg, *number);
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
      }
    } else {
      throw ConfigError(fmt::format("{}:{}: unknown key '{}'", origin, line_no, key));
    }
    if (end == text.size()) break;
  }

  std::vector<std::string> missing;
  for (const auto& k : required_keys()) {
    if (!seen.contains(k)) missing.push_back(k);
  }
  if (!missing.empty()) {
    throw ConfigError(fmt::format("{}: missing required key(s): {}", origin, fmt::join(missing, ", ")));
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

}  // namespace jpm::cli
