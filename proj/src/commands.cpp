#include "relent/commands.hpp"

#include <cmath>
#include <cstdio>

#include "relent/errors.hpp"

namespace relent {

namespace {

constexpr const char* kVersion = "relent 0.1";

std::string text(double v) { return format_number(v); }

std::string params_text(const UnravellingParams& p) {
    std::string s = "theta_a=" + text(p.mix_a.theta) + " phi_a=" + text(p.mix_a.phi) + " lambda_a=" +
                    text(p.mix_a.lambda) + " theta_b=" + text(p.mix_b.theta) + " phi_b=" + text(p.mix_b.phi) +
                    " lambda_b=" + text(p.mix_b.lambda);
    if (p.diffusion_limit) s += " omega=inf";
    else if (p.noisy()) s += " omega=" + text(p.omega.front().real());
    if (p.correlated_jumps) s += " correlated_jumps=true";
    return s;
}

void add_report(Metadata& meta, const EngineReport& r) {
    meta.emplace_back("engine_used", to_string(r.engine));
    meta.emplace_back("step_used", text(r.dt));
    if (r.engine == EngineKind::monte_carlo) {
        meta.emplace_back("trajectories_used", std::to_string(r.n_traj));
        meta.emplace_back("stream_seed", std::to_string(r.seed));
    } else {
        meta.emplace_back("max_ensemble_members", std::to_string(r.max_members));
    }
}

void add_optimizer(Metadata& meta, const OptimizationTask& task, const OptimizationResult& r) {
    meta.emplace_back("optimizer_objective", to_string(task.objective));
    meta.emplace_back("optimizer_scheme", to_string(task.scheme));
    meta.emplace_back("optimizer_protocol", task.scheme == Scheme::fixed_unravelling
                                                ? "fixed parameters per target time; curve is the envelope of the "
                                                  "winners' re-evaluated curves"
                                                : "parameters re-optimized every step for E-bar after that step");
    meta.emplace_back("optimizer_evaluations", std::to_string(r.evaluations));
    meta.emplace_back("optimizer_converged", r.converged ? "true" : "false");
    if (task.scheme == Scheme::fixed_unravelling) {
        for (std::size_t k = 0; k < r.targets.size(); ++k) {
            const auto& t = r.targets[k];
            const std::string key = "target_" + std::to_string(k);
            meta.emplace_back(key, "t=" + text(t.time) + " e_bar=" + text(t.value) + " stderr=" + text(t.std_error) +
                                       " origin=" + t.origin + " " + params_text(t.params));
        }
    }
}

std::string stem_of(const std::string& path) {
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return path.substr(0, path.size() - 4);
    return path;
}

CommandResult written(const std::string& csv, const Metadata& meta, const std::vector<Column>& columns) {
    write_csv(csv, columns);
    write_metadata(metadata_path(csv), meta);
    return {{csv, metadata_path(csv)}, {"wrote " + csv + " (" + std::to_string(columns.front().values.size()) + " rows)"}};
}

}  // namespace

std::vector<Column> curve_columns(const EntanglementCurves& c) {
    std::vector<Column> cols = {
        {"t", c.times},
        {"e_bar", c.e_bar},
        {"e_bar_stderr", c.e_bar_stderr},
        {"e_formation", c.e_formation},
        {"concurrence", c.concurrence},
        {"ea_fidelity_bound", c.ea_fidelity_bound},
        {"ea_eigenstate_bound", c.ea_eigenstate_bound},
        {"outcome_entropy", c.outcome_entropy},
    };
    if (c.ea_numeric) cols.push_back({"ea_numeric", *c.ea_numeric});
    return cols;
}

Metadata run_metadata(const std::string& command, const ExperimentConfig& config) {
    Metadata meta = {{"command", command}, {"version", kVersion}};
    for (const auto& [k, v] : config_entries(config)) meta.emplace_back(k, v);
    for (const auto& w : config.warnings) meta.emplace_back("warning", w);
    return meta;
}

CommandResult cmd_evolve(const ExperimentConfig& config) {
    config.validate();
    const auto params = resolve_unravelling(config);
    EngineReport report;
    const auto curves = evaluate_curves(config, params, &report);
    Metadata meta = run_metadata("evolve", config);
    add_report(meta, report);
    return written(config.output_path, meta, curve_columns(curves));
}

CommandResult cmd_trajectories(const ExperimentConfig& config) {
    config.validate();
    const auto params = resolve_unravelling(config);
    const TimeGrid grid = time_grid(config, params);
    const auto [sa, sb] = channel_specs(config, grid.dt);
    BatchOptions opts;
    opts.n_traj = config.n_traj;
    opts.seed = config.seed;
    opts.record_steps = grid.record_steps;
    opts.accumulate_rho = true;
    const auto batch = run_batch(config.amplitudes, make_trajectory_model(params, sa, sb), opts);
    std::vector<double> distance;
    for (std::size_t k = 0; k < grid.times.size(); ++k)
        distance.push_back(trace_distance(batch.rho[k], exact_state(config, grid.times[k])));
    Metadata meta = run_metadata("trajectories", config);
    add_report(meta, EngineReport{EngineKind::monte_carlo, config.n_traj, 0, grid.dt, config.seed});
    return written(config.output_path, meta,
                   {{"t", grid.times},
                    {"e_bar", batch.mean},
                    {"e_bar_stderr", batch.std_error},
                    {"rho_trace_distance", distance}});
}

CommandResult cmd_optimize(const ExperimentConfig& config) {
    const OptimizationTask task = task_from_config(config);
    const auto r = optimize(task, config);
    Metadata meta = run_metadata("optimize", config);
    add_report(meta, r.report);
    add_optimizer(meta, task, r);
    auto result = written(config.output_path, meta, curve_columns(r.curve));

    const std::string params_path = stem_of(config.output_path) + ".params";
    Metadata params = {{"objective", to_string(task.objective)},
                       {"scheme", to_string(task.scheme)},
                       {"converged", r.converged ? "true" : "false"},
                       {"evaluations", std::to_string(r.evaluations)}};
    const auto& best = r.best_params;
    auto add_params = [&](const std::string& prefix, const UnravellingParams& p) {
        params.emplace_back(prefix + "theta_a", text(p.mix_a.theta));
        params.emplace_back(prefix + "phi_a", text(p.mix_a.phi));
        params.emplace_back(prefix + "lambda_a", text(p.mix_a.lambda));
        params.emplace_back(prefix + "theta_b", text(p.mix_b.theta));
        params.emplace_back(prefix + "phi_b", text(p.mix_b.phi));
        params.emplace_back(prefix + "lambda_b", text(p.mix_b.lambda));
        params.emplace_back(prefix + "omega", p.diffusion_limit ? "inf" : p.noisy() ? text(p.omega.front().real()) : "none");
    };
    add_params("best_", best);
    params.emplace_back("best_value", text(r.best_value));
    if (task.scheme == Scheme::fixed_unravelling) {
        for (std::size_t k = 0; k < r.targets.size(); ++k) {
            const auto& t = r.targets[k];
            const std::string prefix = "target_" + std::to_string(k) + "_";
            params.emplace_back(prefix + "time", text(t.time));
            params.emplace_back(prefix + "value", text(t.value));
            params.emplace_back(prefix + "stderr", text(t.std_error));
            params.emplace_back(prefix + "origin", t.origin);
            params.emplace_back(prefix + "converged", t.converged ? "true" : "false");
            add_params(prefix, t.params);
        }
    }
    write_metadata(params_path, params);
    result.files.push_back(params_path);
    result.notes.push_back("wrote " + params_path + " (best e_bar " + text(r.best_value) + ", " +
                           (r.converged ? "converged" : "not converged") + ")");
    return result;
}

CommandResult cmd_bounds(const ExperimentConfig& config) {
    config.validate();
    ExperimentConfig c = config;
    c.ea_numeric = true;
    EntanglementCurves curves;
    curves.times = time_grid(c, UnravellingParams{}).times;
    fill_state_columns(c, resolve_unravelling(c), c.dt, curves);
    Metadata meta = run_metadata("bounds", c);
    return written(c.output_path, meta,
                   {{"t", curves.times},
                    {"e_formation", curves.e_formation},
                    {"concurrence", curves.concurrence},
                    {"ea_fidelity_bound", curves.ea_fidelity_bound},
                    {"ea_eigenstate_bound", curves.ea_eigenstate_bound},
                    {"ea_numeric", *curves.ea_numeric}});
}

ExperimentConfig fig1_config(const ExperimentConfig& base, bool right_panel) {
    ExperimentConfig c = base;
    c.channel = right_panel ? ChannelKind::damping : ChannelKind::dephasing;
    c.initial_state = right_panel ? "sudden_death" : "bell_phi_plus";
    c.amplitudes = named_state(c.initial_state);
    c.gamma_a = c.gamma_b = 1.0;
    c.dt = 0.01;
    c.t_max = 4.0;
    c.unravelling = "identity";
    c.angles_a = c.angles_b = MixingAngles{};
    c.omega = std::numeric_limits<double>::infinity();
    c.feedback = Feedback::none;
    c.ea_numeric = true;
    c.scheme = Scheme::fixed_unravelling;
    c.target_times = fig1_anchors();
    c.warnings.clear();
    return c;
}

std::vector<double> fig1_anchors() { return {0.25, 0.5, 1.0, 2.0, 4.0}; }

Fig1Panel fig1_panel(const ExperimentConfig& base, bool right_panel) {
    const ExperimentConfig c = fig1_config(base, right_panel);
    c.validate();

    OptimizationTask max_task = task_from_config(c);
    max_task.objective = Objective::maximize;
    max_task.noise_family = NoiseFamily::none;
    OptimizationTask min_task = max_task;
    min_task.objective = Objective::minimize;
    const auto maxu = optimize(max_task, c);
    const auto min_jump = optimize(min_task, c);
    const std::vector<double>& times = maxu.curve.times;

    const double omega_top = 30.0;
    const auto ladder = diffusive_limit_curve(c, {omega_top}, times);
    const auto& diffusive = ladder.front().curve;

    Fig1Panel panel;
    const auto& s = maxu.curve;
    panel.columns = {
        {"t", times},
        {"maxu", s.e_bar},
        {"maxu_stderr", s.e_bar_stderr},
        {"min_jump", min_jump.curve.e_bar},
        {"min_jump_stderr", min_jump.curve.e_bar_stderr},
        {"min_diffusive", diffusive.mean},
        {"min_diffusive_stderr", diffusive.std_error},
        {"e_formation", s.e_formation},
        {"concurrence", s.concurrence},
        {"ea_fidelity_bound", s.ea_fidelity_bound},
        {"ea_eigenstate_bound", s.ea_eigenstate_bound},
        {"ea_numeric", *s.ea_numeric},
    };
    Metadata& meta = panel.metadata;
    meta = run_metadata(right_panel ? "reproduce-fig1 right" : "reproduce-fig1 left", c);
    meta.emplace_back("maxu", "maximize over local jump unravellings");
    add_report(meta, maxu.report);
    add_optimizer(meta, max_task, maxu);
    meta.emplace_back("min_jump", "minimize over local jump unravellings");
    add_report(meta, min_jump.report);
    add_optimizer(meta, min_task, min_jump);
    meta.emplace_back("min_diffusive", "noisy unravelling, jump phase 0, omega=" + text(omega_top));
    add_report(meta, diffusive.report);
    return panel;
}

CommandResult cmd_reproduce_fig1(const ExperimentConfig& base) {
    const std::string stem = stem_of(base.output_path);
    CommandResult out;
    for (bool right : {false, true}) {
        const auto panel = fig1_panel(base, right);
        const auto r = written(stem + (right ? "_right.csv" : "_left.csv"), panel.metadata, panel.columns);
        out.files.insert(out.files.end(), r.files.begin(), r.files.end());
        out.notes.insert(out.notes.end(), r.notes.begin(), r.notes.end());
    }
    return out;
}

}  // namespace relent
