#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "relent/commands.hpp"
#include "relent/errors.hpp"

using namespace relent;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "relent_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<double> column(const std::string& csv, const std::string& name) {
    const auto rows = lines(csv);
    std::vector<std::string> header;
    std::istringstream h(rows.front());
    for (std::string cell; std::getline(h, cell, ',');) header.push_back(cell);
    const auto idx = std::find(header.begin(), header.end(), name) - header.begin();
    std::vector<double> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::istringstream in(rows[r]);
        std::string cell;
        for (long i = 0; i <= idx; ++i) std::getline(in, cell, ',');
        out.push_back(std::strtod(cell.c_str(), nullptr));
    }
    return out;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333");
    CHECK(format_number(std::exp(-1.0)) == "0.367879441");
    CHECK(format_number(123456789012.0) == "1.23456789e+11");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("csv text layout") {
    const auto text = csv_text({{"t", {0.0, 0.5}}, {"x", {1.0, 2.0 / 3.0}}});
    CHECK(text == "t,x\n0,1\n0.5,0.666666667\n");
    CHECK(text.find('\r') == std::string::npos);
    CHECK_THROWS_AS(csv_text({{"t", {0.0, 0.5}}, {"x", {1.0}}}), DimensionError);
    CHECK(metadata_text({{"a", "1"}, {"b", "x y"}}) == "a: 1\nb: x y\n");
    CHECK_THROWS_AS(write_csv("/nonexistent-dir/x.csv", {{"t", {0.0}}}), IoError);
}

TEST_CASE("evolve: dephasing Bell with the identity unravelling") {
    ExperimentConfig c;
    c.output_path = scratch("evolve.csv").string();
    const auto r = cmd_evolve(c);
    REQUIRE(r.files.size() == 2);
    const auto csv = slurp(c.output_path);
    CHECK(lines(csv).front() ==
          "t,e_bar,e_bar_stderr,e_formation,concurrence,ea_fidelity_bound,ea_eigenstate_bound,outcome_entropy");
    CHECK(lines(csv).size() == 201);
    for (double e : column(csv, "e_bar")) CHECK(std::abs(e - 1.0) < 1e-9);
    const auto t = column(csv, "t");
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 4.0);

    const auto meta = slurp(metadata_path(c.output_path));
    for (const char* key : {"command: evolve\n", "seed: 42\n", "merge_tol: 1e-09\n", "engine_used: det\n",
                            "channel: dephasing\n", "dt: 0.01\n"})
        CHECK(meta.find(key) != std::string::npos);
    for (const auto& l : lines(meta)) CHECK(l.find(": ") != std::string::npos);
}

TEST_CASE("evolve: damping Psi+ and the single-row t_max = 0 case") {
    ExperimentConfig c;
    c.channel = ChannelKind::damping;
    c.initial_state = "bell_psi_plus";
    c.amplitudes = states::psi_plus();
    c.output_path = scratch("damping.csv").string();
    cmd_evolve(c);
    const auto csv = slurp(c.output_path);
    const auto t = column(csv, "t");
    const auto e = column(csv, "e_bar");
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(e[i] - std::exp(-t[i])) < 1e-6);

    c.t_max = 0.0;
    cmd_evolve(c);
    const auto rows = lines(slurp(c.output_path));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].rfind("0,1,0,1,1,1,1,", 0) == 0);
}

TEST_CASE("trajectories are byte-identical for identical seeds") {
    ExperimentConfig c;
    c.unravelling = "fifty_fifty";
    c.t_max = 1.0;
    c.output_points = 11;
    c.n_traj = 300;
    c.output_path = scratch("traj_a.csv").string();
    cmd_trajectories(c);
    const auto a = slurp(c.output_path);
    c.output_path = scratch("traj_b.csv").string();
    cmd_trajectories(c);
    CHECK(a == slurp(c.output_path));
    c.seed = 43;
    cmd_trajectories(c);
    CHECK(a != slurp(c.output_path));
    const auto d = column(a, "rho_trace_distance");
    CHECK(d.front() == 0.0);
    for (double x : d) CHECK(x < 0.1);
}

TEST_CASE("optimize writes a curve and a parameter record") {
    ExperimentConfig c;
    c.t_max = 0.5;
    c.output_points = 6;
    c.objective = Objective::maximize;
    c.budget = 30;
    c.restarts = 3;
    c.output_path = scratch("opt.csv").string();
    const auto r = cmd_optimize(c);
    CHECK(r.files.size() == 3);
    for (double e : column(slurp(c.output_path), "e_bar")) CHECK(std::abs(e - 1.0) < 1e-9);
    const auto params = slurp(scratch("opt.params"));
    for (const char* key : {"objective: max", "converged: ", "best_theta_a: ", "best_omega: ", "target_0_value: 1"})
        CHECK(params.find(key) != std::string::npos);
    CHECK(slurp(metadata_path(c.output_path)).find("optimizer_protocol: ") != std::string::npos);

    c.budget = 0;
    CHECK_THROWS_WITH_AS(cmd_optimize(c), "budget must be positive", ConfigError);
}

TEST_CASE("bounds columns") {
    ExperimentConfig c;
    c.channel = ChannelKind::damping;
    c.initial_state = "sudden_death";
    c.amplitudes = named_state("sudden_death");
    c.t_max = 1.0;
    c.output_points = 3;
    c.output_path = scratch("bounds.csv").string();
    cmd_bounds(c);
    const auto csv = slurp(c.output_path);
    CHECK(lines(csv).front() == "t,e_formation,concurrence,ea_fidelity_bound,ea_eigenstate_bound,ea_numeric");
    const auto ef = column(csv, "e_formation");
    const auto ea = column(csv, "ea_numeric");
    const auto f = column(csv, "ea_fidelity_bound");
    for (std::size_t i = 0; i < ef.size(); ++i) {
        CHECK(ef[i] <= ea[i] + 1e-6);
        CHECK(ea[i] <= f[i] + 1e-6);
    }
    CHECK(ef.back() == 0.0);
}

TEST_CASE("fig1 configs pin the physics") {
    ExperimentConfig base;
    base.dt = 0.005;
    base.gamma_a = 0.3;
    base.seed = 11;
    const auto left = fig1_config(base, false);
    CHECK(left.channel == ChannelKind::dephasing);
    CHECK(left.initial_state == "bell_phi_plus");
    CHECK(left.dt == 0.01);
    CHECK(left.gamma_a == 1.0);
    CHECK(left.t_max == 4.0);
    CHECK(left.seed == 11);
    const auto right = fig1_config(base, true);
    CHECK(right.channel == ChannelKind::damping);
    CHECK(std::abs(right.amplitudes[0] - Complex(std::sqrt(0.125))) < 1e-15);
    CHECK(right.target_times == fig1_anchors());
}
