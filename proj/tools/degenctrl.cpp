#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "degenctrl/commands.hpp"
#include "degenctrl/config.hpp"

int main(int argc, char** argv) {
  using namespace degenctrl;
  CLI::App app{"Degenerate age-structured population control toolkit"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool schema = false;
  app.add_flag("--schema", schema, "print the config schema as markdown and exit");

  const char* names[] = {"validate", "forward", "adjoint", "carleman", "control", "fixpoint", "sweep"};
  for (const char* name : names) {
    auto* sub = app.add_subcommand(name, std::string("run ") + name);
    sub->add_option("--config", config_path, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (DEGENCTRL_OUT takes precedence)");
    sub->add_option("--seed", seed, "overrides [scenario] seed");
    sub->add_option("--jobs", jobs, "concurrent sweep instances")->check(CLI::Range(1, 256));
  }
  CLI11_PARSE(app, argc, argv);

  if (schema) {
    std::cout << schema_markdown();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  const auto cmd = command_from_string(app.get_subcommands().front()->get_name());
  try {
    RunConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    const std::string dir = resolve_out_dir(out, cfg);
    const RunResult r = run_command(*cmd, cfg, {dir, jobs});
    std::cout << to_string(*cmd) << ": " << (r.ok() ? "pass" : "fail") << "  report_hash " << r.report_hash
              << "  -> " << dir << "/report.json\n";
    for (const auto& v : r.violations) std::cout << "  violation: " << v << '\n';
    return r.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
