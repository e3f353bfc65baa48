#pragma once

// The CLI subcommands as library calls. Each writes a CSV at config.output_path (fig1: two
// CSVs derived from it) plus a ".meta" sidecar, and returns the paths written.

#include <string>
#include <vector>

#include "relent/experiment.hpp"
#include "relent/io.hpp"
#include "relent/optimizer.hpp"

namespace relent {

struct CommandResult {
    std::vector<std::string> files;
    // One-line human summaries for stdout.
    std::vector<std::string> notes;
};

CommandResult cmd_evolve(const ExperimentConfig& config);
// Monte Carlo batch regardless of the configured engine; adds the trace distance between
// the reconstructed and the exact state.
CommandResult cmd_trajectories(const ExperimentConfig& config);
// Curve CSV plus "<out>.params" with the winning parameters per target time.
CommandResult cmd_optimize(const ExperimentConfig& config);
// Exact-state columns only, with the numeric entanglement of assistance always included.
CommandResult cmd_bounds(const ExperimentConfig& config);
// Both figure panels with built-in physics (gamma = 1, dt = 0.01, t in [0, 4]); the engine,
// sampling and search knobs come from `base`. Writes <stem>_left.csv and <stem>_right.csv.
CommandResult cmd_reproduce_fig1(const ExperimentConfig& base);

std::vector<Column> curve_columns(const EntanglementCurves& curves);
Metadata run_metadata(const std::string& command, const ExperimentConfig& config);

// Figure panels, exposed for tests.
ExperimentConfig fig1_config(const ExperimentConfig& base, bool right_panel);
// Anchor times at which the max/min strategies are optimized.
std::vector<double> fig1_anchors();
struct Fig1Panel {
    std::vector<Column> columns;
    Metadata metadata;
};
Fig1Panel fig1_panel(const ExperimentConfig& base, bool right_panel);

}  // namespace relent
