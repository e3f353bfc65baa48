#pragma once

// Search over local unravellings for the largest or smallest realizable average
// entanglement.
//
// fixed_unravelling: one time-independent parameter set per target time, found by
// multi-start Nelder-Mead (analytic candidates first, then a Latin grid of seeds). The
// reported curve is the pointwise envelope of the winners' full curves, so every point
// on it is realized by one fixed strategy.
// per_step_greedy: the parameters of each step are chosen to optimize E-bar right after
// that step, warm-started from the previous step's choice.

#include <cstdint>
#include <string>
#include <vector>

#include "relent/entanglement.hpp"
#include "relent/experiment.hpp"
#include "relent/unravelling.hpp"

namespace relent {

struct OptimizationTask {
    Objective objective = Objective::minimize;
    // Strictly increasing, within (0, t_max].
    std::vector<double> target_times;
    Scheme scheme = Scheme::fixed_unravelling;
    EngineKind engine = EngineKind::automatic;
    // Objective evaluations per target time; the greedy scheme spreads it over the steps
    // (at least 12 per step).
    int budget = 800;
    int restarts = 16;
    std::uint64_t seed = 42;
    NoiseFamily noise_family = NoiseFamily::diffusion_limit;
    double omega_max = 30.0;
    // Trajectories per Monte Carlo evaluation; the same streams serve every evaluation.
    std::size_t n_traj = 400;
    // Ensemble cap while evaluating objectives; larger ensembles fall back to Monte Carlo.
    std::size_t cap = 512;

    void validate() const;
};

// Task named by the config's [optimizer] section; empty target_times become {t_max}.
OptimizationTask task_from_config(const ExperimentConfig& config);

struct HistoryEntry {
    UnravellingParams params;
    double value = 0.0;
    double time = 0.0;
};

struct TargetOutcome {
    double time = 0.0;
    UnravellingParams params;
    // E-bar of `params` at `time` on the reported curve.
    double value = 0.0;
    double std_error = 0.0;
    // identity, fifty_fifty, ..., latin_<k>, diffusion_limit_<phase>, greedy.
    std::string origin;
    int evaluations = 0;
    bool converged = false;
};

struct Strategy {
    UnravellingParams params;
    std::string origin;
};

struct OptimizationResult {
    // Winner at the last target time.
    UnravellingParams best_params;
    double best_value = 0.0;
    EntanglementCurves curve;
    // Strategies whose re-evaluated curves make up `curve`, and which one realizes each point.
    std::vector<Strategy> strategies;
    std::vector<std::size_t> curve_source;
    std::vector<TargetOutcome> targets;
    int evaluations = 0;
    bool converged = false;
    std::vector<HistoryEntry> history;
    EngineReport report;
};

// E-bar(t) for one unravelling. Deterministic enumeration up to `cap` members, then Monte
// Carlo over streams 0..n_traj-1 of `seed` (common random numbers across calls).
struct ObjectiveValue {
    double value = 0.0;
    double std_error = 0.0;
    EngineKind engine = EngineKind::deterministic;
};

ObjectiveValue evaluate_objective(const ExperimentConfig& config, const UnravellingParams& params, double t,
                                  EngineKind engine, std::size_t n_traj, std::uint64_t seed, std::size_t cap);
inline double evaluate_objective(const ExperimentConfig& config, const UnravellingParams& params, double t) {
    return evaluate_objective(config, params, t, config.engine, config.opt_n_traj, config.seed, config.cap).value;
}

OptimizationResult optimize(const OptimizationTask& task, const ExperimentConfig& config);

// Parameter packing used by the search (exposed for tests).
// Jump family: [theta_a, phi_a, lambda_a, theta_b, phi_b, lambda_b].
UnravellingParams jump_family(const std::vector<double>& x, Feedback feedback);
// Noisy family: [phase_a, phase_b, s], omega = omega_max (1 - cos s) / 2.
UnravellingParams noisy_family(const std::vector<double>& x, double omega_max, Feedback feedback);

struct LadderRung {
    double omega = 0.0;
    AverageCurve curve;
};

// E-bar curves for the noisy unravelling with jump phases from config.angles_a/b at each
// omega of an ascending ladder. All rungs share the step needed by the largest omega, so
// differences between rungs are not discretization artefacts.
std::vector<LadderRung> diffusive_limit_curve(const ExperimentConfig& config, const std::vector<double>& ladder,
                                              const std::vector<double>& times);

// The common step used by diffusive_limit_curve.
double ladder_dt(const ExperimentConfig& config, const std::vector<double>& ladder);

}  // namespace relent
