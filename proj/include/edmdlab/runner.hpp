// runner.hpp
// Experiment commands behind the CLI: each builds the configured map and
// density, runs the study, and persists CSV/SVG artifacts plus a manifest.
// Independent cells run concurrently up to the configured worker count; all
// file writes happen on the calling thread after the cells join.

#pragma once

#include "edmdlab/config.hpp"
#include "edmdlab/manifest.hpp"

#include <string>

namespace edmdlab::cli {

struct RunContext {
  ExperimentConfig config;
  std::string out_dir;  // resolved output directory
  int workers = 1;
};

// Output directory resolution: explicit CLI value, then the EDMDLAB_OUT
// environment variable, then the config's [output] dir.
std::string resolve_out_dir(const std::string& cli_arg,
                            const ExperimentConfig& config);

// Each command returns the written manifest (also persisted to
// <out_dir>/<command>_manifest.txt).
ResultsManifest cmd_resonances(const RunContext& ctx);
ResultsManifest cmd_fig1(const RunContext& ctx);
ResultsManifest cmd_fig2(const RunContext& ctx);
ResultsManifest cmd_fig3(const RunContext& ctx);
ResultsManifest cmd_opuc_diagnostics(const RunContext& ctx);

}  // namespace edmdlab::cli
