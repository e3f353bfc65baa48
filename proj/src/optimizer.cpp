#include "relent/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "relent/errors.hpp"
#include "relent/search.hpp"
#include "relent/trajectories.hpp"

namespace relent {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool better(Objective objective, double a, double b) {
    return objective == Objective::maximize ? a > b : a < b;
}

// Sampled values compete at their pessimistic end, so Monte Carlo noise cannot win on luck.
constexpr double kSelectionSigmas = 2.0;

double guarded(Objective objective, double value, double std_error) {
    return objective == Objective::maximize ? value - kSelectionSigmas * std_error
                                            : value + kSelectionSigmas * std_error;
}

double worst(Objective objective) {
    return objective == Objective::maximize ? -std::numeric_limits<double>::infinity()
                                            : std::numeric_limits<double>::infinity();
}

// Search minimizes; flip the sign for maximization.
double signed_value(Objective objective, double v) { return objective == Objective::maximize ? -v : v; }

double snap(double t, double dt) { return static_cast<double>(std::llround(t / dt)) * dt; }

// Output grid plus the target times, deduplicated on the dt lattice.
std::vector<double> curve_times(const ExperimentConfig& config, const std::vector<double>& targets) {
    std::vector<double> times = time_grid(config, UnravellingParams{}).times;
    for (double t : targets) times.push_back(snap(t, config.dt));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [&](double a, double b) { return std::abs(a - b) < 1e-9 * config.dt; }),
                times.end());
    return times;
}

std::size_t index_of(const std::vector<double>& times, double t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
    return best;
}

struct Start {
    std::string origin;
    bool noisy = false;
    std::vector<double> x;
};

struct Fixed {
    std::string origin;
    UnravellingParams params;
};

// Latin hypercube over the family's box, reproducible from the seed.
std::vector<std::vector<double>> latin_grid(std::size_t rows, const std::vector<std::pair<double, double>>& box,
                                            std::uint64_t seed) {
    std::mt19937_64 rng(splitmix64(seed ^ 0x6c61746e67726964ULL));
    std::vector<std::vector<double>> out(rows, std::vector<double>(box.size()));
    for (std::size_t d = 0; d < box.size(); ++d) {
        std::vector<std::size_t> perm(rows);
        std::iota(perm.begin(), perm.end(), 0);
        // Fisher-Yates with our own draws: std::shuffle differs between standard libraries.
        for (std::size_t i = rows; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
        for (std::size_t r = 0; r < rows; ++r) {
            const double u = (static_cast<double>(perm[r]) + static_cast<double>(rng() >> 11) * 0x1.0p-53) /
                             static_cast<double>(rows);
            out[r][d] = box[d].first + u * (box[d].second - box[d].first);
        }
    }
    return out;
}

}  // namespace

void OptimizationTask::validate() const {
    if (budget <= 0) throw ConfigError("budget must be positive");
    if (restarts <= 0) throw ConfigError("restarts must be positive");
    if (budget < restarts) throw ConfigError("budget must be at least the number of restarts");
    if (target_times.empty()) throw ConfigError("at least one target time is needed");
    for (std::size_t i = 0; i < target_times.size(); ++i) {
        if (!(target_times[i] > 0.0) || !std::isfinite(target_times[i]))
            throw ConfigError("target times must be positive");
        if (i > 0 && !(target_times[i] > target_times[i - 1]))
            throw ConfigError("target times must be strictly increasing");
    }
    if (n_traj == 0) throw ConfigError("n_traj must be positive");
    if (cap == 0) throw ConfigError("cap must be positive");
    if (!(omega_max > 0.0) || !std::isfinite(omega_max)) throw ConfigError("omega_max must be positive and finite");
}

OptimizationTask task_from_config(const ExperimentConfig& config) {
    OptimizationTask task;
    task.objective = config.objective;
    task.target_times = config.target_times.empty() ? std::vector<double>{config.t_max} : config.target_times;
    task.scheme = config.scheme;
    task.engine = config.engine;
    task.budget = config.budget;
    task.restarts = config.restarts;
    task.seed = config.seed;
    task.noise_family = config.noise_family;
    task.omega_max = config.omega_max;
    task.n_traj = config.opt_n_traj;
    task.cap = std::min<std::size_t>(config.cap, 512);
    return task;
}

UnravellingParams jump_family(const std::vector<double>& x, Feedback feedback) {
    if (x.size() != 6) throw DimensionError("jump family needs 6 angles");
    UnravellingParams p;
    p.mix_a = {x[0], x[1], x[2]};
    p.mix_b = {x[3], x[4], x[5]};
    p.feedback = feedback;
    return p;
}

UnravellingParams noisy_family(const std::vector<double>& x, double omega_max, Feedback feedback) {
    if (x.size() != 3) throw DimensionError("noisy family needs 3 parameters");
    UnravellingParams p;
    p.mix_a = {0.0, x[0], 0.0};
    p.mix_b = {0.0, x[1], 0.0};
    p.omega = {Complex{omega_max * (1.0 - std::cos(x[2])) / 2.0, 0.0}};
    p.feedback = feedback;
    return p;
}

ObjectiveValue evaluate_objective(const ExperimentConfig& config, const UnravellingParams& params, double t,
                                  EngineKind engine, std::size_t n_traj, std::uint64_t seed, std::size_t cap) {
    ExperimentConfig c = config;
    c.cap = cap;
    const TimeGrid grid = time_grid(c, params, {t});
    const auto curve = average_curve(c, params, grid, engine, n_traj, seed);
    return {curve.mean.front(), curve.std_error.front(), curve.report.engine};
}

namespace {

OptimizationResult optimize_fixed(const OptimizationTask& task, const ExperimentConfig& config) {
    OptimizationResult result;
    const Feedback fb = config.feedback;
    const bool minimizing = task.objective == Objective::minimize;

    std::vector<Start> candidates = {
        {"identity", false, {0, 0, 0, 0, 0, 0}},
        {"fifty_fifty", false, {kPi / 4, 0, 0, kPi / 4, 0, 0}},
        {"fifty_fifty_a", false, {kPi / 4, 0, 0, 0, 0, 0}},
        {"fifty_fifty_b", false, {0, 0, 0, kPi / 4, 0, 0}},
    };
    const bool finite_noise = minimizing && task.noise_family == NoiseFamily::finite_omega;
    if (finite_noise) candidates.push_back({"noisy_omega_max", true, {0, 0, kPi}});
    std::vector<Fixed> fixed;
    if (minimizing && task.noise_family == NoiseFamily::diffusion_limit && fb == Feedback::none) {
        UnravellingParams p;
        p.diffusion_limit = true;
        fixed.push_back({"diffusion_limit_0", p});
        p.mix_a.phi = p.mix_b.phi = kPi / 2;
        fixed.push_back({"diffusion_limit_pi/2", p});
    }

    const auto n_restarts = static_cast<std::size_t>(task.restarts);
    std::vector<Start> starts(candidates.begin(), candidates.begin() + std::min(n_restarts, candidates.size()));
    if (n_restarts > starts.size()) {
        const std::size_t rows = n_restarts - starts.size();
        const std::size_t noisy_rows = finite_noise ? rows / 2 : 0;
        const auto jump_rows = latin_grid(rows - noisy_rows,
                                          {{0, kPi / 2}, {0, 2 * kPi}, {0, 2 * kPi}, {0, kPi / 2}, {0, 2 * kPi}, {0, 2 * kPi}},
                                          task.seed);
        const auto noisy_rows_x = latin_grid(noisy_rows, {{0, 2 * kPi}, {0, 2 * kPi}, {0, kPi}}, task.seed + 1);
        for (std::size_t r = 0, j = 0, k = 0; r < rows; ++r) {
            const bool noisy = finite_noise && r % 2 == 1 && k < noisy_rows;
            if (noisy) starts.push_back({"latin_noisy_" + std::to_string(k), true, noisy_rows_x[k++]});
            else starts.push_back({"latin_" + std::to_string(j), false, jump_rows[j++]});
        }
    }
    auto params_of = [&](const Start& s, const std::vector<double>& x) {
        return s.noisy ? noisy_family(x, task.omega_max, fb) : jump_family(x, fb);
    };

    // Strategies re-evaluated on the full grid: each target's search winner and its best
    // analytic candidate (a sampled winner can owe its place to a lucky draw).
    std::vector<Strategy>& strategies = result.strategies;
    auto add_strategy = [&](const UnravellingParams& p, const std::string& origin) {
        for (const auto& s : strategies)
            if (s.params.mix_a == p.mix_a && s.params.mix_b == p.mix_b && s.params.omega == p.omega &&
                s.params.diffusion_limit == p.diffusion_limit)
                return;
        strategies.push_back({p, origin});
    };

    for (double target : task.target_times) {
        const double t = snap(target, config.dt);
        TargetOutcome best, best_candidate;
        best.time = t;
        best.value = best_candidate.value = worst(task.objective);
        int used = 0;

        auto consider = [&](const UnravellingParams& p, const std::string& origin, bool candidate) {
            const auto v = evaluate_objective(config, p, t, task.engine, task.n_traj, task.seed, task.cap);
            ++used;
            result.history.push_back({p, v.value, t});
            for (TargetOutcome* slot : {&best, candidate ? &best_candidate : nullptr}) {
                if (!slot) continue;
                if (better(task.objective, guarded(task.objective, v.value, v.std_error),
                           guarded(task.objective, slot->value, slot->std_error))) {
                    slot->value = v.value;
                    slot->std_error = v.std_error;
                    slot->params = p;
                    slot->origin = origin;
                    slot->converged = candidate;
                }
            }
            return v.value;
        };

        // Analytic candidates are always evaluated, so the result can never be worse than them.
        for (const auto& c : candidates) consider(params_of(c, c.x), c.origin, true);
        for (const auto& f : fixed) consider(f.params, f.origin, true);

        const int per_start = (task.budget - used) / static_cast<int>(starts.size());
        if (per_start >= 2) {
            for (const auto& s : starts) {
                const int limit = used + per_start;
                search::NelderMeadOptions nm;
                nm.max_evaluations = per_start;
                nm.initial_step = 0.4;
                nm.f_tolerance = 1e-9;
                nm.x_tolerance = 1e-6;
                const std::string origin = s.origin;
                const auto r = search::nelder_mead(
                    [&](const std::vector<double>& x) {
                        // Hard stop at this start's share of the budget.
                        if (used >= limit) return std::numeric_limits<double>::infinity();
                        try {
                            return signed_value(task.objective, consider(params_of(s, x), origin, false));
                        } catch (const ConfigError&) {
                            // Outside the family's domain (e.g. noise too large for the step).
                            return std::numeric_limits<double>::infinity();
                        }
                    },
                    s.x, nm);
                if (best.origin == origin && !best.converged) best.converged = r.converged;
            }
        }
        best.evaluations = used;
        result.evaluations += used;
        result.targets.push_back(best);
        add_strategy(best.params, best.origin);
        add_strategy(best_candidate.params, best_candidate.origin);
    }
    result.converged = std::all_of(result.targets.begin(), result.targets.end(),
                                   [](const TargetOutcome& o) { return o.converged; });

    const std::vector<double> times = curve_times(config, task.target_times);
    std::vector<AverageCurve> curves;
    for (const auto& s : strategies)
        curves.push_back(average_curve(config, s.params, time_grid(config, s.params, times), config.engine,
                                       config.n_traj, config.seed));

    EntanglementCurves& out = result.curve;
    out.times = times;
    result.curve_source.assign(times.size(), 0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::size_t pick = 0;
        for (std::size_t k = 1; k < curves.size(); ++k)
            if (better(task.objective, guarded(task.objective, curves[k].mean[i], curves[k].std_error[i]),
                       guarded(task.objective, curves[pick].mean[i], curves[pick].std_error[i])))
                pick = k;
        result.curve_source[i] = pick;
        out.e_bar.push_back(curves[pick].mean[i]);
        out.e_bar_stderr.push_back(curves[pick].std_error[i]);
    }
    // Each target reports the strategy realizing the curve there, with the curve's value.
    for (auto& target : result.targets) {
        const std::size_t i = index_of(times, target.time);
        const auto& s = strategies[result.curve_source[i]];
        if (!(s.params.mix_a == target.params.mix_a && s.params.mix_b == target.params.mix_b &&
              s.params.omega == target.params.omega && s.params.diffusion_limit == target.params.diffusion_limit)) {
            target.params = s.params;
            target.origin = s.origin;
            target.converged = true;
        }
        target.value = out.e_bar[i];
        target.std_error = out.e_bar_stderr[i];
    }
    result.best_params = result.targets.back().params;
    result.best_value = result.targets.back().value;

    fill_state_columns(config, result.best_params, config.dt, out);
    // Outcome entropy of the strategy realizing each point.
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& p = strategies[result.curve_source[i]].params;
        if (p.diffusion_limit) {
            out.outcome_entropy[i] = std::nan("");
            continue;
        }
        const auto [sa, sb] = channel_specs(config, time_grid(config, p, {}).dt);
        out.outcome_entropy[i] =
            outcome_entropy(outcome_distribution(unravelled_step(p, sa, sb), exact_state(config, times[i])));
    }
    result.report = curves[result.curve_source.back()].report;
    for (const auto& c : curves) result.report.max_members = std::max(result.report.max_members, c.report.max_members);
    return result;
}

// A population stepped under per-step parameters: the enumerated ensemble, or trajectories
// whose uniforms for the step are drawn once and shared by every trial parameter set.
class GreedyPopulation {
public:
    GreedyPopulation(const ExperimentConfig& config, const OptimizationTask& task)
        : config_(config), deterministic_(task.engine == EngineKind::deterministic) {
        if (deterministic_) {
            ensemble_.members = {config.amplitudes.normalized()};
            options_ = {config.merge_tol, config.cap, config.feedback};
        } else {
            for (std::size_t i = 0; i < task.n_traj; ++i) {
                noise_.emplace_back(task.seed, i);
                states_.push_back(config.amplitudes.normalized());
            }
            uniforms_.resize(task.n_traj);
        }
    }

    bool deterministic() const { return deterministic_; }

    void draw() {
        for (std::size_t i = 0; i < uniforms_.size(); ++i) uniforms_[i] = noise_[i].uniform();
    }

    // E-bar after one step with `params`; commits the step when `commit`.
    EntanglementAverage step(const UnravellingParams& params, bool commit) {
        const auto [sa, sb] = channel_specs(config_, config_.dt);
        const KrausChannel ch = unravelled_step(params, sa, sb);
        if (deterministic_) {
            WeightedEnsemble next = ensemble_;
            step_ensemble(next, ch, config_.dt, options_);
            const auto avg = average_entanglement(next);
            if (commit) ensemble_ = std::move(next);
            return avg;
        }
        std::vector<PureState> next(states_.size());
        for (std::size_t i = 0; i < states_.size(); ++i) {
            std::array<PureState, 16> branch;
            std::array<double, 16> weight{};
            double total = 0.0;
            const std::size_t n = std::min<std::size_t>(ch.size(), 16);
            for (std::size_t k = 0; k < n; ++k) {
                branch[k] = apply(ch.operators[k], states_[i]);
                weight[k] = branch[k].weight();
                total += weight[k];
            }
            double r = uniforms_[i] * total;
            std::size_t pick = n - 1;
            for (std::size_t k = 0; k < n; ++k) {
                if (r < weight[k]) {
                    pick = k;
                    break;
                }
                r -= weight[k];
            }
            while (weight[pick] <= 0.0 && pick > 0) --pick;
            next[i] = branch[pick].scaled(1.0 / std::sqrt(weight[pick]));
            if (params.feedback != Feedback::none) next[i] = apply_feedback(next[i], ch, pick, params.feedback);
        }
        const auto avg = average_entanglement(next);
        if (commit) states_ = std::move(next);
        return avg;
    }

    std::size_t size() const { return deterministic_ ? ensemble_.members.size() : states_.size(); }

private:
    const ExperimentConfig& config_;
    bool deterministic_;
    WeightedEnsemble ensemble_;
    EnsembleOptions options_;
    std::vector<NoiseStream> noise_;
    std::vector<PureState> states_;
    std::vector<double> uniforms_;
};

OptimizationResult optimize_greedy(const OptimizationTask& task, const ExperimentConfig& config) {
    OptimizationResult result;
    const Feedback fb = config.feedback;
    const std::vector<double> times = curve_times(config, task.target_times);
    const auto n_steps = static_cast<std::size_t>(std::llround(times.back() / config.dt));
    const int per_step = std::max(12, task.budget / static_cast<int>(std::max<std::size_t>(1, n_steps)));

    GreedyPopulation population(config, task);
    const std::vector<std::vector<double>> candidates = {
        {0, 0, 0, 0, 0, 0}, {kPi / 4, 0, 0, kPi / 4, 0, 0}, {kPi / 4, 0, 0, 0, 0, 0}, {0, 0, 0, kPi / 4, 0, 0}};
    std::vector<double> x = candidates[0];
    bool all_converged = true;

    EntanglementCurves& out = result.curve;
    std::size_t next_record = 0;
    auto record = [&](std::size_t step, const EntanglementAverage& avg) {
        while (next_record < times.size() && std::llround(times[next_record] / config.dt) == static_cast<long long>(step)) {
            out.times.push_back(times[next_record]);
            out.e_bar.push_back(avg.mean);
            out.e_bar_stderr.push_back(avg.std_error);
            TargetOutcome o;
            o.time = times[next_record];
            o.params = jump_family(x, fb);
            o.value = avg.mean;
            o.std_error = avg.std_error;
            o.origin = "greedy";
            o.converged = all_converged;
            result.curve_source.push_back(result.strategies.size());
            result.strategies.push_back({o.params, "greedy"});
            result.targets.push_back(o);
            ++next_record;
        }
    };
    {
        const PureState s = config.amplitudes.normalized();
        record(0, population.deterministic() ? EntanglementAverage{entropy_of_entanglement(s), 0.0}
                                             : average_entanglement(std::vector<PureState>(task.n_traj, s)));
    }

    for (std::size_t step = 1; step <= n_steps; ++step) {
        if (!population.deterministic()) population.draw();
        const double t = static_cast<double>(step) * config.dt;
        int used = 0;
        auto f = [&](const std::vector<double>& y) {
            ++used;
            const auto avg = population.step(jump_family(y, fb), false);
            result.history.push_back({jump_family(y, fb), avg.mean, t});
            return signed_value(task.objective, avg.mean);
        };
        // First step: start from the best analytic candidate.
        if (step == 1) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : candidates) {
                const double v = f(c);
                if (v < best) {
                    best = v;
                    x = c;
                }
            }
        }
        search::NelderMeadOptions nm;
        nm.max_evaluations = std::max(2, per_step - used);
        nm.initial_step = 0.2;
        nm.f_tolerance = 1e-12;
        nm.x_tolerance = 1e-6;
        // The returned vertex is never worse than the warm start.
        const auto r = search::nelder_mead(f, x, nm);
        x = r.x;
        all_converged = all_converged && r.converged;
        result.evaluations += used;
        const auto avg = population.step(jump_family(x, fb), true);
        record(step, avg);
    }

    result.converged = all_converged;
    result.best_params = result.targets.back().params;
    result.best_value = result.targets.back().value;
    fill_state_columns(config, result.best_params, config.dt, out);
    for (std::size_t i = 0; i < out.times.size(); ++i) {
        const auto& p = result.targets[i].params;
        const auto [sa, sb] = channel_specs(config, config.dt);
        out.outcome_entropy[i] = outcome_entropy(outcome_distribution(unravelled_step(p, sa, sb), exact_state(config, out.times[i])));
    }
    result.report.engine = population.deterministic() ? EngineKind::deterministic : EngineKind::monte_carlo;
    result.report.n_traj = population.deterministic() ? 0 : task.n_traj;
    result.report.dt = config.dt;
    result.report.seed = task.seed;
    result.report.max_members = population.deterministic() ? population.size() : 0;
    return result;
}

}  // namespace

OptimizationResult optimize(const OptimizationTask& task, const ExperimentConfig& config) {
    task.validate();
    config.validate();
    for (double t : task.target_times)
        if (t > config.t_max + 1e-12) throw ConfigError("target times must not exceed t_max");
    if (config.unravelling == "correlated_jumps")
        throw ConfigError("correlated jumps are a fixed nonlocal strategy and are not optimized");
    return task.scheme == Scheme::per_step_greedy ? optimize_greedy(task, config) : optimize_fixed(task, config);
}

double ladder_dt(const ExperimentConfig& config, const std::vector<double>& ladder) {
    UnravellingParams p;
    p.omega = {Complex{*std::max_element(ladder.begin(), ladder.end()), 0.0}};
    return time_grid(config, p, {}).dt;
}

std::vector<LadderRung> diffusive_limit_curve(const ExperimentConfig& config, const std::vector<double>& ladder,
                                              const std::vector<double>& times) {
    if (ladder.empty()) throw ConfigError("the omega ladder is empty");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] >= 0.0) || !std::isfinite(ladder[i])) throw ConfigError("ladder omegas must be finite and >= 0");
        if (i > 0 && !(ladder[i] > ladder[i - 1])) throw ConfigError("the omega ladder must be ascending");
    }
    ExperimentConfig fine = config;
    fine.dt = ladder_dt(config, ladder);
    std::vector<LadderRung> out;
    for (double w : ladder) {
        UnravellingParams p;
        p.mix_a = {0.0, config.angles_a.phi, config.angles_a.lambda};
        p.mix_b = {0.0, config.angles_b.phi, config.angles_b.lambda};
        p.omega = {Complex{w, 0.0}};
        p.feedback = config.feedback;
        const TimeGrid grid = time_grid(fine, p, times);
        out.push_back({w, average_curve(fine, p, grid, config.engine, config.n_traj, config.seed)});
    }
    return out;
}

}  // namespace relent
