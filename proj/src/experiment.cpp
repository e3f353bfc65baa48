#include "relent/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Shortest text that reads back to the same double.
std::string exact_text(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

double to_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE || std::isnan(x))
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || *end != '\0' || errno == ERANGE)
        throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
    return x;
}

int to_int(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    errno = 0;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || errno == ERANGE || x < -1000000000L || x > 1000000000L)
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        std::istringstream words(item);
        std::string w;
        while (words >> w) out.push_back(to_double(key, w));
    }
    return out;
}

std::string list_text(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + exact_text(xs[i]);
    return s;
}

EngineKind engine_from(const std::string& key, const std::string& v) {
    if (v == "auto" || v == "automatic") return EngineKind::automatic;
    if (v == "det" || v == "deterministic") return EngineKind::deterministic;
    if (v == "mc" || v == "monte_carlo") return EngineKind::monte_carlo;
    throw ConfigError(key + ": expected auto, det or mc, got '" + v + "'");
}

Objective objective_from(const std::string& key, const std::string& v) {
    if (v == "min" || v == "minimize") return Objective::minimize;
    if (v == "max" || v == "maximize") return Objective::maximize;
    throw ConfigError(key + ": expected min or max, got '" + v + "'");
}

struct Field {
    const char* section;
    const char* key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define RELENT_DOUBLE(section, name)                                                              \
    Field {                                                                                       \
        section, #name, [](const ExperimentConfig& c) { return exact_text(c.name); },             \
            [](ExperimentConfig& c, const std::string& v) { c.name = to_double(#name, v); }       \
    }
#define RELENT_SIZE(section, name)                                                                            \
    Field {                                                                                                   \
        section, #name, [](const ExperimentConfig& c) { return std::to_string(c.name); },                    \
            [](ExperimentConfig& c, const std::string& v) { c.name = static_cast<std::size_t>(to_u64(#name, v)); } \
    }
#define RELENT_INT(section, name)                                                                 \
    Field {                                                                                       \
        section, #name, [](const ExperimentConfig& c) { return std::to_string(c.name); },         \
            [](ExperimentConfig& c, const std::string& v) { c.name = to_int(#name, v); }          \
    }
#define RELENT_ANGLE(name, side, member)                                                                   \
    Field {                                                                                                \
        "unravelling", name, [](const ExperimentConfig& c) { return exact_text(c.side.member); },          \
            [](ExperimentConfig& c, const std::string& v) { c.side.member = to_double(name, v); }          \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"system", "channel", [](const ExperimentConfig& c) { return to_string(c.channel); },
         [](ExperimentConfig& c, const std::string& v) { c.channel = channel_kind_from_string(v); }},
        RELENT_DOUBLE("system", gamma_a),
        RELENT_DOUBLE("system", gamma_b),
        {"system", "initial_state", [](const ExperimentConfig& c) { return c.initial_state; },
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "custom") {
                 c.initial_state = v;
                 return;
             }
             if (!is_named_state(v))
                 throw ConfigError("initial_state: unknown state '" + v +
                                   "' (expected bell_phi_plus, bell_phi_minus, bell_psi_plus, bell_psi_minus, "
                                   "sudden_death or custom)");
             c.initial_state = v;
             c.amplitudes = named_state(v);
         }},
        {"system", "amplitudes",
         [](const ExperimentConfig& c) {
             std::vector<double> xs;
             for (std::size_t i = 0; i < 4; ++i) {
                 xs.push_back(c.amplitudes[i].real());
                 xs.push_back(c.amplitudes[i].imag());
             }
             return list_text(xs);
         },
         [](ExperimentConfig& c, const std::string& v) {
             const auto xs = to_list("amplitudes", v);
             if (xs.size() != 8)
                 throw ConfigError("amplitudes: expected 8 reals (re, im for |00>, |01>, |10>, |11>), got " +
                                   std::to_string(xs.size()));
             PureState s(Complex{xs[0], xs[1]}, Complex{xs[2], xs[3]}, Complex{xs[4], xs[5]}, Complex{xs[6], xs[7]});
             const double norm = std::sqrt(s.weight());
             if (!(norm > 0.0)) throw ConfigError("amplitudes: zero vector");
             if (std::abs(norm - 1.0) > 1e-6) {
                 c.warnings.push_back("amplitudes had norm " + exact_text(norm) + "; renormalized");
             }
             c.amplitudes = norm == 1.0 ? s : s.scaled(1.0 / norm);
             c.initial_state = "custom";
         }},
        RELENT_DOUBLE("system", dt),
        RELENT_DOUBLE("system", t_max),
        {"system", "step_form", [](const ExperimentConfig& c) { return to_string(c.step_form); },
         [](ExperimentConfig& c, const std::string& v) { c.step_form = step_form_from_string(v); }},

        {"unravelling", "unravelling", [](const ExperimentConfig& c) { return c.unravelling; },
         [](ExperimentConfig& c, const std::string& v) {
             static const char* known[] = {"identity", "fifty_fifty", "fifty_fifty_a", "angles", "diffusive",
                                           "correlated_jumps"};
             if (std::find(std::begin(known), std::end(known), v) == std::end(known))
                 throw ConfigError("unravelling: unknown value '" + v +
                                   "' (expected identity, fifty_fifty, fifty_fifty_a, angles, diffusive or "
                                   "correlated_jumps)");
             c.unravelling = v;
         }},
        RELENT_ANGLE("theta_a", angles_a, theta),
        RELENT_ANGLE("phi_a", angles_a, phi),
        RELENT_ANGLE("lambda_a", angles_a, lambda),
        RELENT_ANGLE("theta_b", angles_b, theta),
        RELENT_ANGLE("phi_b", angles_b, phi),
        RELENT_ANGLE("lambda_b", angles_b, lambda),
        RELENT_DOUBLE("unravelling", omega),
        {"unravelling", "feedback", [](const ExperimentConfig& c) { return to_string(c.feedback); },
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "none") c.feedback = Feedback::none;
             else if (v == "phase_flip") c.feedback = Feedback::phase_flip;
             else throw ConfigError("feedback: expected none or phase_flip, got '" + v + "'");
         }},

        {"engine", "engine", [](const ExperimentConfig& c) { return to_string(c.engine); },
         [](ExperimentConfig& c, const std::string& v) { c.engine = engine_from("engine", v); }},
        RELENT_SIZE("engine", n_traj),
        {"engine", "seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
         [](ExperimentConfig& c, const std::string& v) { c.seed = to_u64("seed", v); }},
        RELENT_DOUBLE("engine", merge_tol),
        RELENT_SIZE("engine", cap),
        RELENT_SIZE("engine", output_points),
        RELENT_DOUBLE("engine", max_noise_per_step),

        {"bounds", "ea_numeric", [](const ExperimentConfig& c) { return std::string(c.ea_numeric ? "true" : "false"); },
         [](ExperimentConfig& c, const std::string& v) { c.ea_numeric = to_bool("ea_numeric", v); }},
        RELENT_INT("bounds", ea_members),
        RELENT_INT("bounds", ea_restarts),
        RELENT_INT("bounds", ea_budget),

        {"optimizer", "objective", [](const ExperimentConfig& c) { return to_string(c.objective); },
         [](ExperimentConfig& c, const std::string& v) { c.objective = objective_from("objective", v); }},
        {"optimizer", "scheme", [](const ExperimentConfig& c) { return to_string(c.scheme); },
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "fixed_unravelling") c.scheme = Scheme::fixed_unravelling;
             else if (v == "per_step_greedy") c.scheme = Scheme::per_step_greedy;
             else throw ConfigError("scheme: expected fixed_unravelling or per_step_greedy, got '" + v + "'");
         }},
        {"optimizer", "target_times", [](const ExperimentConfig& c) { return list_text(c.target_times); },
         [](ExperimentConfig& c, const std::string& v) { c.target_times = to_list("target_times", v); }},
        RELENT_INT("optimizer", budget),
        RELENT_INT("optimizer", restarts),
        {"optimizer", "noise_family", [](const ExperimentConfig& c) { return to_string(c.noise_family); },
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "none") c.noise_family = NoiseFamily::none;
             else if (v == "diffusion_limit") c.noise_family = NoiseFamily::diffusion_limit;
             else if (v == "finite_omega") c.noise_family = NoiseFamily::finite_omega;
             else throw ConfigError("noise_family: expected none, diffusion_limit or finite_omega, got '" + v + "'");
         }},
        RELENT_DOUBLE("optimizer", omega_max),
        RELENT_SIZE("optimizer", opt_n_traj),

        {"output", "output_path", [](const ExperimentConfig& c) { return c.output_path; },
         [](ExperimentConfig& c, const std::string& v) { c.output_path = v; }},
    };
    return table;
}

#undef RELENT_DOUBLE
#undef RELENT_SIZE
#undef RELENT_INT
#undef RELENT_ANGLE

const Field* find_field(const std::string& key) {
    std::string bare = key;
    std::string section;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
        section = key.substr(0, dot);
        bare = key.substr(dot + 1);
    }
    for (const auto& f : fields())
        if (bare == f.key && (section.empty() || section == f.section)) return &f;
    return nullptr;
}

}  // namespace

std::string to_string(EngineKind engine) {
    switch (engine) {
        case EngineKind::automatic: return "auto";
        case EngineKind::deterministic: return "det";
        case EngineKind::monte_carlo: return "mc";
    }
    return "auto";
}

std::string to_string(Objective objective) { return objective == Objective::maximize ? "max" : "min"; }

std::string to_string(Scheme scheme) {
    return scheme == Scheme::fixed_unravelling ? "fixed_unravelling" : "per_step_greedy";
}

std::string to_string(NoiseFamily family) {
    switch (family) {
        case NoiseFamily::none: return "none";
        case NoiseFamily::diffusion_limit: return "diffusion_limit";
        case NoiseFamily::finite_omega: return "finite_omega";
    }
    return "none";
}

bool is_named_state(const std::string& name) {
    return name == "bell_phi_plus" || name == "bell_phi_minus" || name == "bell_psi_plus" ||
           name == "bell_psi_minus" || name == "sudden_death";
}

PureState named_state(const std::string& name) {
    if (name == "bell_phi_plus") return states::phi_plus();
    if (name == "bell_phi_minus") return states::phi_minus();
    if (name == "bell_psi_plus") return states::psi_plus();
    if (name == "bell_psi_minus") return states::psi_minus();
    // (|00> + sqrt7 |11>) / sqrt8: entanglement dies at finite time under decay.
    if (name == "sudden_death") return PureState(std::sqrt(1.0 / 8.0), 0.0, 0.0, std::sqrt(7.0 / 8.0));
    throw ConfigError("unknown initial state '" + name + "'");
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (!(gamma_a > 0.0) || !(gamma_b > 0.0) || !std::isfinite(gamma_a) || !std::isfinite(gamma_b))
        fail("gamma_a and gamma_b must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
    if (std::max(gamma_a, gamma_b) * dt > kMaxGammaDt)
        fail("gamma*dt = " + exact_text(std::max(gamma_a, gamma_b) * dt) + " exceeds " + exact_text(kMaxGammaDt));
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) fail("t_max must be non-negative");
    if (t_max / dt > 1e6) fail("t_max/dt exceeds 1e6 steps");
    const double steps = t_max / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) fail("t_max must be a whole number of dt steps");
    if (std::abs(std::sqrt(amplitudes.weight()) - 1.0) > 1e-9) fail("initial amplitudes are not normalized");
    if (!(omega >= 0.0)) fail("omega must be non-negative");
    if (n_traj == 0) fail("n_traj must be positive");
    if (!(merge_tol >= 0.0 && merge_tol < 1.0)) fail("merge_tol must lie in [0, 1)");
    if (cap == 0) fail("cap must be positive");
    if (output_points == 0) fail("output_points must be positive");
    if (!(max_noise_per_step > 0.0 && max_noise_per_step <= 1.0)) fail("max_noise_per_step must lie in (0, 1]");
    if (ea_members < 1 || ea_restarts < 1 || ea_budget < 1) fail("ea_members, ea_restarts and ea_budget must be positive");
    if (!(omega_max > 0.0)) fail("omega_max must be positive");
    if (opt_n_traj == 0) fail("opt_n_traj must be positive");
    for (std::size_t i = 0; i < target_times.size(); ++i) {
        if (!(target_times[i] > 0.0) || target_times[i] > t_max + 1e-12)
            fail("target_times must lie in (0, t_max]");
        if (i > 0 && !(target_times[i] > target_times[i - 1])) fail("target_times must be strictly increasing");
    }
    resolve_unravelling(*this).validate();
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
    const Field* f = find_field(trim(key));
    if (!f) throw ConfigError("unknown key '" + key + "'");
    f->set(config, trim(value));
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(number) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const Field* f = find_field(key);
        if (!f) throw ConfigError(where + "unknown key '" + key + "'");
        if (!section.empty() && key.find('.') == std::string::npos && section != f->section)
            throw ConfigError(where + "key '" + key + "' belongs to section [" + f->section + "], not [" + section +
                              "]");
        try {
            f->set(config, trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) {
        if (std::string(f.key) == "amplitudes" && config.initial_state != "custom") continue;
        out.emplace_back(f.key, f.get(config));
    }
    return out;
}

std::string serialize_config(const ExperimentConfig& config) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        if (std::string(f.key) == "amplitudes" && config.initial_state != "custom") continue;
        if (section != f.section) {
            if (!section.empty()) out << '\n';
            section = f.section;
            out << '[' << section << "]\n";
        }
        out << f.key << " = " << f.get(config) << '\n';
    }
    return out.str();
}

UnravellingParams resolve_unravelling(const ExperimentConfig& config) {
    UnravellingParams p;
    p.feedback = config.feedback;
    const double quarter = std::acos(-1.0) / 4.0;
    const std::string& u = config.unravelling;
    if (u == "fifty_fifty") {
        p.mix_a.theta = p.mix_b.theta = quarter;
    } else if (u == "fifty_fifty_a") {
        p.mix_a.theta = quarter;
    } else if (u == "angles") {
        p.mix_a = config.angles_a;
        p.mix_b = config.angles_b;
    } else if (u == "diffusive") {
        p.mix_a = config.angles_a;
        p.mix_b = config.angles_b;
        if (std::isinf(config.omega)) p.diffusion_limit = true;
        else p.omega = {config.omega};
    } else if (u == "correlated_jumps") {
        p.correlated_jumps = true;
    } else if (u != "identity") {
        throw ConfigError("unknown unravelling '" + u + "'");
    }
    return p;
}

namespace {

std::size_t substeps_for(const ExperimentConfig& config, const UnravellingParams& params) {
    double omega2 = 0.0;
    for (const auto& w : params.omega) omega2 = std::max(omega2, std::norm(w));
    const double per_step = omega2 * std::max(config.gamma_a, config.gamma_b) * config.dt;
    if (per_step <= config.max_noise_per_step) return 1;
    return static_cast<std::size_t>(std::ceil(per_step / config.max_noise_per_step - 1e-12));
}

}  // namespace

TimeGrid time_grid(const ExperimentConfig& config, const UnravellingParams& params) {
    const auto coarse = static_cast<std::size_t>(std::llround(config.t_max / config.dt));
    const std::size_t points = std::min(config.output_points, coarse + 1);
    std::vector<double> times;
    for (std::size_t j = 0; j < points; ++j) {
        const std::size_t step =
            points == 1 ? 0 : static_cast<std::size_t>(std::llround(static_cast<double>(j * coarse) / (points - 1)));
        times.push_back(static_cast<double>(step) * config.dt);
    }
    return time_grid(config, params, times);
}

TimeGrid time_grid(const ExperimentConfig& config, const UnravellingParams& params, const std::vector<double>& times) {
    TimeGrid g;
    g.substeps = substeps_for(config, params);
    g.dt = config.dt / static_cast<double>(g.substeps);
    for (double t : times) {
        if (t < 0.0) throw PreconditionError("record times must be non-negative");
        const auto coarse = static_cast<std::size_t>(std::llround(t / config.dt));
        g.record_steps.push_back(coarse * g.substeps);
        g.times.push_back(static_cast<double>(coarse) * config.dt);
    }
    if (!std::is_sorted(g.record_steps.begin(), g.record_steps.end()))
        throw PreconditionError("record times must be non-decreasing");
    g.n_steps = g.record_steps.empty() ? 0 : g.record_steps.back();
    return g;
}

std::pair<ChannelSpec, ChannelSpec> channel_specs(const ExperimentConfig& config, double dt) {
    return {ChannelSpec{config.channel, config.gamma_a, dt, config.step_form},
            ChannelSpec{config.channel, config.gamma_b, dt, config.step_form}};
}

Matrix exact_state(const ExperimentConfig& config, double t) {
    const auto ch = two_qubit_step(finite_time_channel(config.channel, config.gamma_a, t),
                                   finite_time_channel(config.channel, config.gamma_b, t));
    return apply_channel(config.amplitudes.normalized().projector(), ch);
}

// First-come merging leaves an O(merge_tol) error per merge, which adds up over the many steps
// of a refined grid. Tighten quadratically below gamma dt = 0.01 so the drift stays put.
double effective_merge_tol(const ExperimentConfig& config, double dt) {
    const double g = std::max(config.gamma_a, config.gamma_b) * dt / 0.01;
    return config.merge_tol * std::min(1.0, g * g);
}

AverageCurve average_curve(const ExperimentConfig& config, const UnravellingParams& params, const TimeGrid& grid,
                           EngineKind engine, std::size_t n_traj, std::uint64_t seed) {
    const auto [spec_a, spec_b] = channel_specs(config, grid.dt);
    AverageCurve out;
    out.times = grid.times;
    out.report.dt = grid.dt;

    if (engine != EngineKind::monte_carlo && !params.diffusion_limit) {
        try {
            const auto channel = unravelled_step(params, spec_a, spec_b);
            const EnsembleOptions opts{effective_merge_tol(config, grid.dt), config.cap, params.feedback};
            const auto snaps = ensemble_snapshots(config.amplitudes, channel, grid.dt, grid.record_steps, opts);
            for (const auto& e : snaps) {
                out.mean.push_back(average_entanglement(e).mean);
                out.std_error.push_back(0.0);
                out.report.max_members = std::max(out.report.max_members, e.members.size());
            }
            out.report.engine = EngineKind::deterministic;
            return out;
        } catch (const BlowUpError&) {
            if (engine == EngineKind::deterministic) throw;
        }
    }
    if (engine == EngineKind::deterministic)
        throw ConfigError("the diffusion limit has no finite ensemble; use the Monte Carlo engine");

    const auto model = make_trajectory_model(params, spec_a, spec_b);
    BatchOptions opts;
    opts.n_traj = n_traj;
    opts.seed = seed;
    opts.record_steps = grid.record_steps;
    const auto batch = run_batch(config.amplitudes, model, opts);
    out.mean = batch.mean;
    out.std_error = batch.std_error;
    out.report.engine = EngineKind::monte_carlo;
    out.report.n_traj = n_traj;
    out.report.seed = seed;
    return out;
}

void fill_state_columns(const ExperimentConfig& config, const UnravellingParams& params, double dt,
                        EntanglementCurves& curves) {
    const std::size_t n = curves.times.size();
    curves.e_formation.assign(n, 0.0);
    curves.concurrence.assign(n, 0.0);
    curves.ea_fidelity_bound.assign(n, 0.0);
    curves.ea_eigenstate_bound.assign(n, 0.0);
    curves.outcome_entropy.assign(n, std::nan(""));
    if (config.ea_numeric) curves.ea_numeric.emplace(n, 0.0);

    std::optional<KrausChannel> step;
    if (!params.diffusion_limit) {
        const auto [spec_a, spec_b] = channel_specs(config, dt);
        step = unravelled_step(params, spec_a, spec_b);
    }
    DecompositionSearch search;
    search.members = config.ea_members;
    search.restarts = config.ea_restarts;
    search.budget = config.ea_budget;
    for (std::size_t k = 0; k < n; ++k) {
        const Matrix rho = exact_state(config, curves.times[k]);
        const auto b = mixed_state_bounds(rho);
        curves.e_formation[k] = b.e_formation;
        curves.concurrence[k] = b.concurrence;
        curves.ea_fidelity_bound[k] = b.ea_fidelity_bound;
        curves.ea_eigenstate_bound[k] = b.ea_eigenstate_bound;
        if (step) curves.outcome_entropy[k] = outcome_entropy(outcome_distribution(*step, rho));
        if (config.ea_numeric) (*curves.ea_numeric)[k] = ea_numeric(rho, search).value;
    }
}

EntanglementCurves evaluate_curves(const ExperimentConfig& config, const UnravellingParams& params,
                                   EngineReport* report) {
    config.validate();
    const TimeGrid grid = time_grid(config, params);
    const auto avg = average_curve(config, params, grid, config.engine, config.n_traj, config.seed);
    EntanglementCurves curves;
    curves.times = avg.times;
    curves.e_bar = avg.mean;
    curves.e_bar_stderr = avg.std_error;
    fill_state_columns(config, params, grid.dt, curves);
    if (report) *report = avg.report;
    return curves;
}

}  // namespace relent
