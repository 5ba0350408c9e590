#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace bergman;
using namespace bergman::cli;

namespace {

RunConfig load(Command cmd, const std::string& path) {
  if (path.empty()) return default_config(cmd);
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::config, "cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, path + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::config, path + ": expected a JSON object");
  if (!j.contains("command")) j["command"] = to_string(cmd);
  if (j["command"] != to_string(cmd))
    fail(ErrorKind::config, path + " is a '" + j["command"].dump() + "' config, not '" + to_string(cmd) + "'");
  return RunConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-type (1,1) experiments for Bergman-type projections on the unit ball"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  bool emit = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "sampler seed (overrides sampler.seed)");
  app.add_option("--workers", workers, "worker threads (overrides sampler.workers)");
  app.add_option("--out", out, "output directory (overrides output.dir)");
  app.add_flag("--emit-config", emit, "print the resolved configuration and exit");
  std::optional<Command> cmd;
  for (Command c : {Command::dyadic, Command::czd, Command::kernel_bounds, Command::weaktype}) {
    CLI::App* sub = app.add_subcommand(to_string(c));
    sub->fallthrough();
    sub->callback([&cmd, c] { cmd = c; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  RunConfig cfg;
  try {
    cfg = load(*cmd, config_path);
    if (seed) cfg.sampler.seed = *seed;
    if (workers) cfg.sampler.workers = *workers;
    if (out) cfg.output_dir = *out;
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  if (emit) {
    std::cout << cfg.to_json().dump(2) << "\n";
    return kPass;
  }

  const RunResult r = run_command(cfg);
  if (!r.message.empty()) std::cerr << (r.exit_code == kPass ? "note: " : "error: ") << r.message << "\n";
  std::cout << to_string(cfg.command) << ": " << r.summary.value("status", "error") << " (exit " << r.exit_code
            << ") -> " << cfg.output_dir << "\n";
  return r.exit_code;
}
