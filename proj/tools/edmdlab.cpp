// edmdlab: spectral analysis experiments for analytic expanding circle maps.
//
//   edmdlab <resonances|fig1|fig2|fig3|opuc-diagnostics>
//           --config <path> [--out <dir>] [--workers <n>] [--seed <int>]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "CLI11.hpp"

#include "edmdlab/config.hpp"
#include "edmdlab/runner.hpp"

#include <cstdlib>
#include <utility>
#include <iostream>
#include <string>

namespace {

int run(const std::string& command, const edmdlab::cli::RunContext& ctx) {
  using edmdlab::cli::ResultsManifest;
  ResultsManifest m;
  if (command == "resonances")
    m = edmdlab::cli::cmd_resonances(ctx);
  else if (command == "fig1")
    m = edmdlab::cli::cmd_fig1(ctx);
  else if (command == "fig2")
    m = edmdlab::cli::cmd_fig2(ctx);
  else if (command == "fig3")
    m = edmdlab::cli::cmd_fig3(ctx);
  else
    m = edmdlab::cli::cmd_opuc_diagnostics(ctx);
  std::cout << m.command << ": wrote " << m.artifacts.size()
            << " artifacts to " << ctx.out_dir << "\n";
  for (const auto& [k, v] : m.notes) std::cout << "  " << k << " = " << v << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EDMD and transfer-operator experiments for expanding circle maps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  long long seed = -1;

  const std::pair<const char*, const char*> subcommands[] = {
      {"resonances", "reference transfer-operator resonances"},
      {"fig1", "eigenvalue error vs dictionary size"},
      {"fig2", "Koopman mode magnitudes and weighted convergence"},
      {"fig3", "data-EDMD spectra and error vs data size"},
      {"opuc-diagnostics", "projection and factorisation diagnostics"}};
  for (const auto& [name, description] : subcommands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default: config/env)");
    sub->add_option("--workers", workers, "max concurrent experiment cells");
    sub->add_option("--seed", seed, "override the config seed0");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // command-line usage errors count as configuration errors
  }

  try {
    edmdlab::cli::RunContext ctx;
    ctx.config = edmdlab::cli::ExperimentConfig::load(config_path);
    if (seed >= 0) ctx.config.seed0 = static_cast<std::uint64_t>(seed);
    if (workers > 0) ctx.config.workers = workers;
    ctx.workers = ctx.config.workers;
    ctx.out_dir = edmdlab::cli::resolve_out_dir(out_dir, ctx.config);
    return run(app.get_subcommands().front()->get_name(), ctx);
  } catch (const edmdlab::cli::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
