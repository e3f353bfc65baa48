#pragma once

// Experiment configuration and the engine dispatch shared by the CLI, the optimizer
// and the acceptance checks.
//
// Config files are flat `key = value` lines grouped under [section] headers; '#' starts a
// comment. Keys are unique across sections, so a section header is optional and an
// override may name either `key` or `section.key`.

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relent/channels.hpp"
#include "relent/entanglement.hpp"
#include "relent/linalg.hpp"
#include "relent/trajectories.hpp"
#include "relent/unravelling.hpp"

namespace relent {

enum class EngineKind { automatic, deterministic, monte_carlo };
enum class Objective { maximize, minimize };
enum class Scheme { fixed_unravelling, per_step_greedy };
// Which noisy family a minimization also searches.
enum class NoiseFamily { none, diffusion_limit, finite_omega };

std::string to_string(EngineKind engine);
std::string to_string(Objective objective);
std::string to_string(Scheme scheme);
std::string to_string(NoiseFamily family);

struct ExperimentConfig {
    // [system]
    ChannelKind channel = ChannelKind::dephasing;
    double gamma_a = 1.0;
    double gamma_b = 1.0;
    // bell_phi_plus, bell_phi_minus, bell_psi_plus, bell_psi_minus, sudden_death or custom.
    std::string initial_state = "bell_phi_plus";
    // Resolved amplitudes (custom states: parsed from `amplitudes`, 8 reals re/im interleaved).
    PureState amplitudes = states::phi_plus();
    double dt = 0.01;
    double t_max = 4.0;
    StepForm step_form = StepForm::exact;

    // [unravelling]
    // identity, fifty_fifty, fifty_fifty_a, angles, diffusive, correlated_jumps.
    std::string unravelling = "identity";
    MixingAngles angles_a;
    MixingAngles angles_b;
    // Noise amplitude for `diffusive`; infinity selects the diffusion limit.
    double omega = std::numeric_limits<double>::infinity();
    Feedback feedback = Feedback::none;

    // [engine]
    EngineKind engine = EngineKind::automatic;
    std::size_t n_traj = 2000;
    std::uint64_t seed = 42;
    double merge_tol = 1e-9;
    std::size_t cap = 4096;
    std::size_t output_points = 200;
    // Largest omega^2 gamma dt per step; finer steps are used when exceeded.
    double max_noise_per_step = 0.5;

    // [bounds]
    bool ea_numeric = false;
    int ea_members = 6;
    int ea_restarts = 6;
    int ea_budget = 3000;

    // [optimizer]
    Objective objective = Objective::minimize;
    Scheme scheme = Scheme::fixed_unravelling;
    // Times at which the objective is optimized; empty means t_max.
    std::vector<double> target_times;
    int budget = 800;
    int restarts = 16;
    NoiseFamily noise_family = NoiseFamily::diffusion_limit;
    double omega_max = 30.0;
    // Trajectories per Monte Carlo objective evaluation (common random numbers).
    std::size_t opt_n_traj = 400;

    std::string output_path = "relent_out.csv";

    // Non-fatal notes produced while parsing (e.g. renormalized amplitudes).
    std::vector<std::string> warnings;

    // Throws ConfigError on out-of-range values.
    void validate() const;
};

// Named initial states.
PureState named_state(const std::string& name);
bool is_named_state(const std::string& name);

// Parses config text; `origin` names the source in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig load_config(const std::string& path);
// Applies one override; throws ConfigError naming the key on failure.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
// Canonical sectioned form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);
// Flat (key, value) view in canonical order, used for metadata sidecars.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);

// Unravelling parameters named by the config.
UnravellingParams resolve_unravelling(const ExperimentConfig& config);

// Time discretization actually used for an unravelling: the config dt divided by an
// integer so that noisy steps stay within max_noise_per_step.
struct TimeGrid {
    double dt = 0.01;
    std::size_t substeps = 1;
    std::size_t n_steps = 0;
    // Record points on the fine grid and their times.
    std::vector<std::size_t> record_steps;
    std::vector<double> times;
};

TimeGrid time_grid(const ExperimentConfig& config, const UnravellingParams& params);
// Same, recording only at the given times (rounded to the fine grid).
TimeGrid time_grid(const ExperimentConfig& config, const UnravellingParams& params, const std::vector<double>& times);

std::pair<ChannelSpec, ChannelSpec> channel_specs(const ExperimentConfig& config, double dt);

// rho(t) of the unmonitored evolution.
Matrix exact_state(const ExperimentConfig& config, double t);

struct EngineReport {
    EngineKind engine = EngineKind::deterministic;
    std::size_t n_traj = 0;
    std::size_t max_members = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
};

struct AverageCurve {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_error;
    EngineReport report;
};

// merge_tol tightened for grids finer than gamma dt = 0.01.
double effective_merge_tol(const ExperimentConfig& config, double dt);

// E-bar at the grid's record points. Automatic engine: enumeration while the ensemble stays
// under the cap, Monte Carlo otherwise (diffusion limit is Monte Carlo only).
AverageCurve average_curve(const ExperimentConfig& config, const UnravellingParams& params, const TimeGrid& grid,
                           EngineKind engine, std::size_t n_traj, std::uint64_t seed);

// Exact-state columns (E_F, C, F, E, optional ea_numeric, outcome entropy) at curves.times.
// Outcome entropy is that of one step of length dt taken from rho(t); NaN for the diffusion
// limit, whose outcomes are continuous.
void fill_state_columns(const ExperimentConfig& config, const UnravellingParams& params, double dt,
                        EntanglementCurves& curves);

// Full curve set for one unravelling on the config's output grid.
EntanglementCurves evaluate_curves(const ExperimentConfig& config, const UnravellingParams& params,
                                   EngineReport* report = nullptr);

}  // namespace relent
