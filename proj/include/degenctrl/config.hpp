#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace degenctrl {

// Flat key = value text with [section] headers and '#' comments. Every key is
// declared in one table (config.cpp), which drives parsing, echo and the schema doc.
struct RunConfig {
  // [scenario]
  std::string name = "scenario";
  std::uint64_t seed = 1;
  std::string out = "out";

  // [grid]
  std::size_t Nx = 32;
  std::size_t Na = 32;
  std::size_t Nt = 32;
  double T = 1.0;
  double A = 1.0;
  double grading = 1.05;

  // [profile]
  std::string profile = "power_law";  // power_law | constant | csv
  double M1 = 0.5;
  double M2 = 0.0;
  std::optional<double> theta0;
  std::optional<double> theta1;
  double k_value = 1.0;  // constant profile
  std::string csv_path;
  std::size_t mesh_points = 800;

  // [rates]
  std::string beta = "zero";  // zero | constant | uniform | ramp
  double beta_value = 0.0;
  double a_bar = 0.5;
  std::string mu = "zero";  // zero | constant | age_linear
  double mu_value = 0.0;

  // [kernel]
  std::string kernel = "zero";  // zero | constant | gaussian_kernel | admissible_decay_kernel
  double kernel_amp = 0.5;
  double kernel_lag = 0.25;
  double kernel_width = 0.1;

  // [window]
  double alpha = 0.3;
  double rho_w = 0.8;

  // [data]
  std::string y0 = "sin_bump";  // zero | sin_bump | random_smooth
  std::string v_T = "sin_bump";
  std::string g = "zero";
  std::string f = "zero";
  std::string h = "zero";
  double amplitude = 1.0;

  // [weights]
  std::string orientation = "auto";  // auto | left | right
  double s = 1.0;
  std::optional<double> kappa;  // unset: kappa_max
  std::size_t quad_points = 800;

  // [carleman]
  std::vector<double> s_values = {1.0, 3.0, 10.0};
  std::vector<std::string> estimates = {"all"};

  // [control]
  double eps = 1e-4;
  std::vector<double> eps_list = {1e-2, 1e-4, 1e-6};
  double cg_tol = 1e-8;
  int cg_max_iter = 500;
  double fp_tol = 1e-6;
  int fp_max_iter = 20;

  bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Canonical text for every key; parse_config(echo_config(c)) == c.
std::string echo_config(const RunConfig& c);

struct ConfigKey {
  std::string section;
  std::string key;
  std::string type;
  std::string default_value;
  std::string help;
};
std::vector<ConfigKey> config_schema();

}  // namespace degenctrl
