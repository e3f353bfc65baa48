#pragma once

// Realizable ensembles in time.
//
// Three engines share one state representation:
//  - jump trajectories sampled one at a time (Monte Carlo),
//  - breadth-first enumeration of every measurement record, merging members equal up
//    to a global phase (exact while the reachable set stays small),
//  - diffusive trajectories driven by Gaussian records (Euler-Maruyama on the linear
//    D_J operators, renormalized every step).

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "relent/channels.hpp"
#include "relent/linalg.hpp"
#include "relent/unravelling.hpp"

namespace relent {

// Per-trajectory random source. The engine seed mixes (seed, stream_id) with SplitMix64 so
// neighbouring ids give unrelated sequences.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t stream_id);

    // Uniform on [0, 1), 53 random bits.
    double uniform();
    double gaussian();

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Members are unnormalized; member i carries weight |phi_i|^2.
struct WeightedEnsemble {
    std::vector<PureState> members;
    double time = 0.0;

    double total_weight() const;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<PureState> states;
    // outcomes[k] produced states[k + 1].
    std::vector<std::string> outcomes;
    std::vector<double> entanglement;
};

struct JumpOutcome {
    std::size_t index = 0;
    PureState state;
};

// Draws an outcome with the Born probabilities of `channel` (renormalized against the
// completeness residual) and returns the normalized post-measurement state.
JumpOutcome jump_step(const PureState& state, const KrausChannel& channel, NoiseStream& noise);

// Throws ConfigError when phase-flip feedback is requested for anything but a product
// dephasing channel: a local Z cannot undo a decay, and nonlocal clicks name no qubit.
void check_feedback(const KrausChannel& channel, Feedback feedback);

// Local Z on every qubit whose detector clicked in outcome `outcome`.
PureState apply_feedback(const PureState& state, const KrausChannel& channel, std::size_t outcome,
                         Feedback feedback);

TrajectoryRecord run_jump_trajectory(const PureState& initial, const KrausChannel& channel, std::size_t n_steps,
                                     double dt, Feedback feedback, NoiseStream& noise);

struct EnsembleOptions {
    // Members with |<a|b>| >= (1 - merge_tol) |a| |b| are merged.
    double merge_tol = 1e-9;
    std::size_t cap = 4096;
    Feedback feedback = Feedback::none;
};

// One breadth-first step: every member branches into every outcome, then merges.
// Throws BlowUpError past the cap.
void step_ensemble(WeightedEnsemble& ensemble, const KrausChannel& channel, double dt,
                   const EnsembleOptions& options = {});

WeightedEnsemble ensemble_propagate(const PureState& initial, const KrausChannel& channel, std::size_t n_steps,
                                    double dt, const EnsembleOptions& options = {});

// Snapshots after each step count in `record_steps` (non-decreasing).
std::vector<WeightedEnsemble> ensemble_snapshots(const PureState& initial, const KrausChannel& channel,
                                                 double dt, const std::vector<std::size_t>& record_steps,
                                                 const EnsembleOptions& options = {});

Matrix reconstruct_rho(const WeightedEnsemble& ensemble);

struct EntanglementAverage {
    double mean = 0.0;
    double std_error = 0.0;
};

// Weighted mean of the members' entropy of entanglement; std_error is 0.
EntanglementAverage average_entanglement(const WeightedEnsemble& ensemble);
// Equal-weight sample mean over trajectory end states, with the sample standard error.
EntanglementAverage average_entanglement(const std::vector<PureState>& samples);

// Diffusive (homodyne-like) unravelling of local noise:
//   D_J = K0 + sum_s g_s J_s dt,  K0 = 1 - dt/2 sum_s g_s^dag g_s,
//   J_s dt = <g_s + g_s^dag> dt + dW_s,  dW_s ~ N(0, dt),
// with g_s = sqrt(gamma_s) u_s L_s acting on qubit s and u_s the observer's jump phase.
struct DiffusiveModel {
    std::array<Matrix, 2> rates;
    Matrix drift;
    double dt = 0.0;
};

DiffusiveModel diffusive_model(const UnravellingParams& params, const ChannelSpec& spec_a,
                               const ChannelSpec& spec_b);

// D_J for an explicit record J (per site, units of 1/time).
Matrix diffusive_operator(const DiffusiveModel& model, const std::array<double, 2>& record);

// <g_s + g_s^dag> in the normalized state.
std::array<double, 2> record_drift(const DiffusiveModel& model, const PureState& state);

// Samples J from its drift plus white noise and returns the renormalized D_J |psi>.
// Throws StepRejectedError if the output norm vanishes.
PureState diffusive_step(const PureState& state, const DiffusiveModel& model, NoiseStream& noise);

// What a single trajectory does per step.
struct TrajectoryModel {
    // Jump unravelling (used when `diffusive` is empty).
    KrausChannel channel;
    std::optional<DiffusiveModel> diffusive;
    Feedback feedback = Feedback::none;
    double dt = 0.01;

    PureState step(const PureState& state, NoiseStream& noise) const;
};

TrajectoryModel make_trajectory_model(const UnravellingParams& params, const ChannelSpec& spec_a,
                                      const ChannelSpec& spec_b);

struct BatchOptions {
    std::size_t n_traj = 1000;
    std::uint64_t seed = 42;
    // Step counts at which to record; non-decreasing.
    std::vector<std::size_t> record_steps;
    bool accumulate_rho = false;
    // 0 picks worker_threads().
    unsigned threads = 0;
};

struct BatchResult {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_error;
    // Mean projector at each record, when requested.
    std::vector<Matrix> rho;
    std::size_t n_traj = 0;
};

// Runs trajectories 0..n_traj-1 on their own noise streams. Sums are formed per fixed
// block of trajectory indices and combined pairwise, so results do not depend on the
// thread count.
BatchResult run_batch(const PureState& initial, const TrajectoryModel& model, const BatchOptions& options);

// Worker count: hardware concurrency, capped by REL_ENT_THREADS when set.
unsigned worker_threads();

}  // namespace relent
