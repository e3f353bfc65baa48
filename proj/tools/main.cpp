// relent: command-line front end.
//
//   relent <evolve|trajectories|optimize|bounds|reproduce-fig1> [--config PATH] [--seed N]
//          [--out PATH] [--objective min|max] [--engine det|mc] [--ntraj N] [--<key> VALUE ...]
//
// Any config key can be overridden as --key value (or --section.key value); the named flags
// win over both.

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <optional>

#include "relent/commands.hpp"
#include "relent/errors.hpp"

namespace {

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> objective;
    std::optional<std::string> engine;
    std::optional<std::size_t> ntraj;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_path, "config file (key = value under [sections])");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--out", f.out, "output CSV path");
    sub->add_option("--objective", f.objective, "optimization objective")->check(CLI::IsMember({"min", "max"}));
    sub->add_option("--engine", f.engine, "ensemble engine")->check(CLI::IsMember({"det", "mc"}));
    sub->add_option("--ntraj", f.ntraj, "Monte Carlo trajectories");
    sub->allow_extras();
}

// Leftover "--key value" / "--key=value" pairs become config overrides.
std::vector<std::pair<std::string, std::string>> overrides(const std::vector<std::string>& rest) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        const std::string& tok = rest[i];
        if (tok.rfind("--", 0) != 0) throw relent::ConfigError("unexpected argument '" + tok + "'");
        std::string key = tok.substr(2), value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key.erase(eq);
        } else {
            if (i + 1 >= rest.size()) throw relent::ConfigError("option --" + key + " needs a value");
            value = rest[++i];
        }
        for (auto& ch : key)
            if (ch == '-') ch = '_';
        out.emplace_back(key, value);
    }
    return out;
}

relent::ExperimentConfig build_config(const Flags& f, const std::vector<std::string>& rest) {
    relent::ExperimentConfig c = f.config_path.empty() ? relent::ExperimentConfig{} : relent::load_config(f.config_path);
    for (const auto& [k, v] : overrides(rest)) {
        try {
            relent::set_config_value(c, k, v);
        } catch (const relent::ConfigError& e) {
            throw relent::ConfigError(std::string("--") + k + ": " + e.what());
        }
    }
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.output_path = *f.out;
    if (f.objective) relent::set_config_value(c, "objective", *f.objective);
    if (f.engine) relent::set_config_value(c, "engine", *f.engine);
    if (f.ntraj) c.n_traj = *f.ntraj;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Average entanglement realizable by local monitoring of two decohering qubits"};
    app.require_subcommand(1);

    using Command = std::function<relent::CommandResult(const relent::ExperimentConfig&)>;
    const std::vector<std::tuple<std::string, std::string, Command>> commands = {
        {"evolve", "E-bar and exact-state bounds for one unravelling", relent::cmd_evolve},
        {"trajectories", "Monte Carlo batch with state-reconstruction check", relent::cmd_trajectories},
        {"optimize", "search local unravellings for the max/min E-bar", relent::cmd_optimize},
        {"bounds", "E_F, concurrence and E_A bounds of the unmonitored state", relent::cmd_bounds},
        {"reproduce-fig1", "both reference panels (dephasing Bell, damping sudden death)", relent::cmd_reproduce_fig1},
    };
    std::vector<Flags> flags(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        subs.push_back(app.add_subcommand(std::get<0>(commands[i]), std::get<1>(commands[i])));
        add_flags(subs.back(), flags[i]);
    }

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            const auto config = build_config(flags[i], subs[i]->remaining());
            for (const auto& w : config.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            const auto result = std::get<2>(commands[i])(config);
            for (const auto& note : result.notes) std::printf("%s\n", note.c_str());
            return 0;
        } catch (const relent::ConfigError& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return 2;
        } catch (const relent::IoError& e) {
            std::fprintf(stderr, "i/o error: %s\n", e.what());
            return 3;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 1;
        }
    }
    return 1;
}
