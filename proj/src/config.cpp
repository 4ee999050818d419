#include "degenctrl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "degenctrl/io.hpp"

namespace degenctrl {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("expected a finite number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("expected a nonnegative integer, got '" + v + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list entry in '" + v + "'");
    out.push_back(item);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
  return out;
}

struct Entry {
  ConfigKey doc;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Entry number(std::string sec, std::string key, double RunConfig::*m, std::string help,
             bool positive = false) {
  return {{sec, key, positive ? "positive real" : "real", "", std::move(help)},
          [m, positive](RunConfig& c, const std::string& v) {
            const double x = to_double(v);
            if (positive && !(x > 0.0)) throw ConfigError("must be positive, got '" + v + "'");
            c.*m = x;
          },
          [m](const RunConfig& c) { return format_double(c.*m); }};
}

Entry count(std::string sec, std::string key, std::size_t RunConfig::*m, std::string help,
            std::size_t min = 1) {
  return {{sec, key, "integer >= " + std::to_string(min), "", std::move(help)},
          [m, min](RunConfig& c, const std::string& v) {
            const auto x = to_uint(v);
            if (x < min) throw ConfigError("must be at least " + std::to_string(min));
            c.*m = static_cast<std::size_t>(x);
          },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Entry integer(std::string sec, std::string key, int RunConfig::*m, std::string help) {
  return {{sec, key, "integer >= 1", "", std::move(help)},
          [m](RunConfig& c, const std::string& v) {
            const auto x = to_uint(v);
            if (x < 1 || x > 1000000) throw ConfigError("must be in [1, 1000000]");
            c.*m = static_cast<int>(x);
          },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Entry text(std::string sec, std::string key, std::string RunConfig::*m, std::string help) {
  return {{sec, key, "string", "", std::move(help)},
          [m](RunConfig& c, const std::string& v) { c.*m = v; },
          [m](const RunConfig& c) { return c.*m; }};
}

Entry choice(std::string sec, std::string key, std::string RunConfig::*m,
             std::vector<std::string> allowed, std::string help) {
  std::string type = "one of " + join<std::string>(allowed, [](const std::string& s) { return s; });
  return {{sec, key, type, "", std::move(help)},
          [m, allowed](RunConfig& c, const std::string& v) {
            if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
              throw ConfigError("'" + v + "' is not one of the allowed values");
            c.*m = v;
          },
          [m](const RunConfig& c) { return c.*m; }};
}

Entry optional_number(std::string sec, std::string key, std::optional<double> RunConfig::*m,
                      std::string help) {
  return {{sec, key, "real or empty", "", std::move(help)},
          [m](RunConfig& c, const std::string& v) {
            if (v.empty())
              (c.*m).reset();
            else
              c.*m = to_double(v);
          },
          [m](const RunConfig& c) { return (c.*m) ? format_double(*(c.*m)) : std::string(); }};
}

Entry number_list(std::string sec, std::string key, std::vector<double> RunConfig::*m,
                  std::string help) {
  return {{sec, key, "comma separated positive reals", "", std::move(help)},
          [m](RunConfig& c, const std::string& v) {
            std::vector<double> xs;
            for (const auto& item : split_list(v)) {
              const double x = to_double(item);
              if (!(x > 0.0)) throw ConfigError("list entries must be positive");
              xs.push_back(x);
            }
            if (xs.empty()) throw ConfigError("list must not be empty");
            c.*m = std::move(xs);
          },
          [m](const RunConfig& c) {
            return join<double>(c.*m, [](const double& x) { return format_double(x); });
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    const std::vector<std::string> data_kinds = {"zero", "sin_bump", "random_smooth"};
    std::vector<Entry> t = {
        text("scenario", "name", &RunConfig::name, "label copied into reports"),
        {{"scenario", "seed", "integer >= 0", "", "seed for random_smooth data"},
         [](RunConfig& c, const std::string& v) { c.seed = to_uint(v); },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        text("scenario", "out", &RunConfig::out, "output directory (--out and DEGENCTRL_OUT override)"),

        count("grid", "Nx", &RunConfig::Nx, "space cells", 8),
        count("grid", "Na", &RunConfig::Na, "age cells", 2),
        count("grid", "Nt", &RunConfig::Nt, "time steps; must equal T Na / A", 1),
        number("grid", "T", &RunConfig::T, "final time", true),
        number("grid", "A", &RunConfig::A, "maximal age", true),
        number("grid", "grading", &RunConfig::grading,
               "geometric spacing ratio toward degenerate endpoints", true),

        choice("profile", "kind", &RunConfig::profile, {"power_law", "constant", "csv"},
               "diffusion coefficient k"),
        number("profile", "M1", &RunConfig::M1, "exponent at x = 0"),
        number("profile", "M2", &RunConfig::M2, "exponent at x = 1"),
        optional_number("profile", "theta0", &RunConfig::theta0,
                        "monotonicity exponent at 0 (strong endpoints)"),
        optional_number("profile", "theta1", &RunConfig::theta1,
                        "monotonicity exponent at 1 (strong endpoints)"),
        number("profile", "k_value", &RunConfig::k_value, "value of the constant profile", true),
        text("profile", "csv_path", &RunConfig::csv_path,
             "CSV with columns x,k (relative to the working directory)"),
        count("profile", "mesh_points", &RunConfig::mesh_points,
              "validation mesh intervals", 10),

        choice("rates", "beta", &RunConfig::beta, {"zero", "constant", "uniform", "ramp"}, "fertility"),
        number("rates", "beta_value", &RunConfig::beta_value, "fertility level"),
        number("rates", "a_bar", &RunConfig::a_bar, "end of the fertility-free ages"),
        choice("rates", "mu", &RunConfig::mu, {"zero", "constant", "age_linear"}, "mortality"),
        number("rates", "mu_value", &RunConfig::mu_value, "mortality level"),

        choice("kernel", "kind", &RunConfig::kernel,
               {"zero", "constant", "gaussian_kernel", "admissible_decay_kernel"}, "memory kernel b"),
        number("kernel", "amp", &RunConfig::kernel_amp, "kernel amplitude"),
        number("kernel", "lag", &RunConfig::kernel_lag, "gaussian lag t - s"),
        number("kernel", "width", &RunConfig::kernel_width, "gaussian width", true),

        number("window", "alpha", &RunConfig::alpha, "left end of the control window"),
        number("window", "rho_w", &RunConfig::rho_w, "right end of the control window"),

        choice("data", "y0", &RunConfig::y0, data_kinds, "initial state"),
        choice("data", "v_T", &RunConfig::v_T, data_kinds, "adjoint terminal data"),
        choice("data", "g", &RunConfig::g, data_kinds, "adjoint source"),
        choice("data", "f", &RunConfig::f, data_kinds, "forward control (forward command)"),
        choice("data", "h", &RunConfig::h, data_kinds,
               "explicit forward source (forward command, zero kernel only)"),
        number("data", "amplitude", &RunConfig::amplitude, "scale applied to every data field"),

        choice("weights", "orientation", &RunConfig::orientation, {"auto", "left", "right"},
               "auto: right when only k(1) = 0"),
        number("weights", "s", &RunConfig::s, "Carleman parameter used by control", true),
        optional_number("weights", "kappa", &RunConfig::kappa, "empty selects kappa_max"),
        count("weights", "quad_points", &RunConfig::quad_points, "tabulation intervals for p, rho", 10),

        number_list("carleman", "s_values", &RunConfig::s_values, "s sweep"),
        {{"carleman", "estimates", "comma separated names or all", "",
          "Thm31, Cor31, PropModif, PropModifFinal, Caccioppoli, HardyPoincare, RightVariant"},
         [](RunConfig& c, const std::string& v) { c.estimates = split_list(v); },
         [](const RunConfig& c) {
           return join<std::string>(c.estimates, [](const std::string& s) { return s; });
         }},

        number("control", "eps", &RunConfig::eps, "penalty relative to the data Rayleigh quotient", true),
        number_list("control", "eps_list", &RunConfig::eps_list, "penalties for the sweep command"),
        number("control", "cg_tol", &RunConfig::cg_tol, "relative CG residual", true),
        integer("control", "cg_max_iter", &RunConfig::cg_max_iter, "CG iteration cap"),
        number("control", "fp_tol", &RunConfig::fp_tol, "relative fixed-point residual", true),
        integer("control", "fp_max_iter", &RunConfig::fp_max_iter, "fixed-point iteration cap"),
    };
    const RunConfig defaults;
    for (auto& e : t) e.doc.default_value = e.get(defaults);
    return t;
  }();
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& content) {
  RunConfig c;
  std::set<std::string> sections, seen;
  for (const auto& e : entries()) sections.insert(e.doc.section);
  std::istringstream in(content);
  std::string raw, section;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!sections.count(section)) throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + s + "'", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line);
    const auto it = std::find_if(entries().begin(), entries().end(), [&](const Entry& e) {
      return e.doc.section == section && e.doc.key == key;
    });
    if (it == entries().end())
      throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line);
    if (!seen.insert(section + "." + key).second)
      throw ConfigError("duplicate key '" + key + "' in section [" + section + "]", line);
    try {
      it->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError("[" + section + "] " + key + ": " + e.what(), line);
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string echo_config(const RunConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& e : entries()) {
    if (e.doc.section != section) {
      if (!section.empty()) os << '\n';
      section = e.doc.section;
      os << '[' << section << "]\n";
    }
    os << e.doc.key << " = " << e.get(c) << '\n';
  }
  return os.str();
}

std::vector<ConfigKey> config_schema() {
  std::vector<ConfigKey> out;
  for (const auto& e : entries()) out.push_back(e.doc);
  return out;
}

}  // namespace degenctrl
