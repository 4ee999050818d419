#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "degenctrl/config.hpp"
#include "json.hpp"

namespace degenctrl {

enum class Command { Validate, Forward, Adjoint, Carleman, Control, Fixpoint, Sweep };
std::string_view to_string(Command c);
std::optional<Command> command_from_string(std::string_view name);

struct RunOptions {
  std::string out_dir;
  int jobs = 1;
};

struct RunResult {
  nlohmann::ordered_json report;
  std::string report_hash;  // FNV-1a of the report without timings
  std::vector<std::string> violations;
  std::vector<std::pair<std::string, std::string>> artifacts;  // (relative path, hash)
  bool ok() const { return violations.empty(); }
  int exit_code() const { return ok() ? 0 : 1; }
};

// Runs one subcommand, writing report.json, manifest.txt, plots.json and the
// data files into opt.out_dir (created if missing).
RunResult run_command(Command cmd, const RunConfig& config, const RunOptions& opt);

// DEGENCTRL_OUT, then the command line, then the config.
std::string resolve_out_dir(const std::optional<std::string>& cli_out, const RunConfig& c);

// Markdown table of every config key.
std::string schema_markdown();

}  // namespace degenctrl
