#include <cmath>
#include <cstdlib>
#include <set>

#include "doctest.h"
#include "relent/entanglement.hpp"
#include "relent/errors.hpp"
#include "relent/trajectories.hpp"
#include "support.hpp"

using namespace relent;
using relent::testing::random_pure_state;

namespace {

Matrix exact_rho(const PureState& initial, ChannelKind kind, double gamma, double t) {
    const auto ch = two_qubit_step(finite_time_channel(kind, gamma, t), finite_time_channel(kind, gamma, t));
    return apply_channel(initial.normalized().projector(), ch);
}

// |<a|b>|^2 for normalized copies.
double fidelity(const PureState& a, const PureState& b) {
    return std::norm(inner(a.normalized(), b.normalized()));
}

KrausChannel identity_unravelling(ChannelKind kind, double dt, StepForm form = StepForm::first_order) {
    const ChannelSpec spec{kind, 1.0, dt, form};
    return unravelled_step({}, spec, spec);
}

}  // namespace

TEST_CASE("NoiseStream is reproducible per (seed, stream)") {
    NoiseStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        differs_c |= x != c.uniform();
        differs_d |= x != d.uniform();
    }
    CHECK(differs_c);
    CHECK(differs_d);
    CHECK(a.gaussian() == b.gaussian());
}

TEST_CASE("jump_step examples") {
    NoiseStream noise(1, 0);
    const auto id = jump_step(states::phi_plus(), two_qubit_step(identity_channel(2), identity_channel(2)), noise);
    CHECK(id.index == 0);
    CHECK(fidelity(id.state, states::phi_plus()) == doctest::Approx(1.0).epsilon(1e-15));

    // Dephasing clicks map Phi+ to Phi-; both clicks return Phi+.
    const auto deph = identity_unravelling(ChannelKind::dephasing, 0.1);
    std::set<std::size_t> seen;
    for (int i = 0; i < 400; ++i) {
        const auto out = jump_step(states::phi_plus(), deph, noise);
        seen.insert(out.index);
        const auto& site = deph.site_outcomes[out.index];
        const bool odd = (site[0] + site[1]) % 2 == 1;
        CHECK(fidelity(out.state, odd ? states::phi_minus() : states::phi_plus()) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(out.state.weight() == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(seen.size() == 4);

    // Damping: a click on either side leaves |00>.
    const auto damp = identity_unravelling(ChannelKind::damping, 0.1);
    int clicks = 0;
    for (int i = 0; i < 200; ++i) {
        const auto out = jump_step(states::psi_plus(), damp, noise);
        if (out.index == 0) {
            CHECK(fidelity(out.state, states::psi_plus()) == doctest::Approx(1.0).epsilon(1e-14));
        } else {
            ++clicks;
            CHECK(fidelity(out.state, states::ket00()) == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    CHECK(clicks > 0);

    KrausChannel dead;
    dead.operators = {Matrix(4, 4)};
    CHECK_THROWS_AS(jump_step(states::ket00(), dead, noise), DegenerateError);
}

TEST_CASE("jump_step samples the Born probabilities") {
    const auto deph = identity_unravelling(ChannelKind::dephasing, 0.05);
    const auto dist = outcome_distribution(deph, states::phi_plus());
    std::vector<double> counts(deph.size(), 0.0);
    NoiseStream noise(11, 0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) counts[jump_step(states::phi_plus(), deph, noise).index] += 1.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double p = dist.probabilities[k];
        CHECK(std::abs(counts[k] / n - p) < 4.0 * std::sqrt(p * (1 - p) / n) + 1e-12);
    }
}

TEST_CASE("phase-flip feedback") {
    const auto deph = identity_unravelling(ChannelKind::dephasing, 0.05);
    // Outcome "1,0" is a click on A only.
    std::size_t a_click = 0;
    for (std::size_t i = 0; i < deph.size(); ++i)
        if (deph.labels[i] == "1,0") a_click = i;
    const PureState fixed = apply_feedback(states::phi_minus(), deph, a_click, Feedback::phase_flip);
    CHECK(fidelity(fixed, states::phi_plus()) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(max_abs_diff(apply_feedback(states::phi_minus(), deph, 0, Feedback::phase_flip).projector(),
                       states::phi_minus().projector()) == 0.0);

    NoiseStream noise(5, 0);
    const auto rec = run_jump_trajectory(states::phi_plus(), deph, 200, 0.05, Feedback::phase_flip, noise);
    for (const auto& s : rec.states) CHECK(std::abs(fidelity(s, states::phi_plus()) - 1.0) < 1e-10);

    WeightedEnsemble e = ensemble_propagate(states::phi_plus(), deph, 50, 0.05, {1e-9, 4096, Feedback::phase_flip});
    CHECK(e.members.size() == 1);

    const auto damp = identity_unravelling(ChannelKind::damping, 0.05);
    CHECK_THROWS_AS(apply_feedback(states::psi_plus(), damp, 1, Feedback::phase_flip), ConfigError);
    CHECK_THROWS_AS(run_jump_trajectory(states::psi_plus(), damp, 3, 0.05, Feedback::phase_flip, noise), ConfigError);
    UnravellingParams corr;
    corr.correlated_jumps = true;
    const ChannelSpec spec{ChannelKind::dephasing, 1.0, 0.05};
    CHECK_THROWS_AS(check_feedback(unravelled_step(corr, spec, spec), Feedback::phase_flip), ConfigError);
}

TEST_CASE("run_jump_trajectory") {
    NoiseStream noise(3, 9);
    const auto damp = identity_unravelling(ChannelKind::damping, 0.01);
    const auto zero = run_jump_trajectory(states::psi_plus(), damp, 0, 0.01, Feedback::none, noise);
    CHECK(zero.states.size() == 1);
    CHECK(zero.outcomes.empty());
    CHECK(zero.entanglement.front() == doctest::Approx(1.0));

    const auto rec = run_jump_trajectory(random_pure_state(), damp, 100, 0.01, Feedback::none, noise);
    CHECK(rec.states.size() == 101);
    CHECK(rec.times.size() == 101);
    CHECK(rec.outcomes.size() == 100);
    CHECK(rec.entanglement.size() == 101);
    CHECK(rec.times.back() == doctest::Approx(1.0));
    for (const auto& s : rec.states) CHECK(std::abs(s.weight() - 1.0) < 1e-9);

    // No-jump evolution A0 (x) B0 keeps Psi+ (both components decay alike).
    PureState psi = states::psi_plus();
    for (int k = 0; k < 500; ++k) psi = apply(damp.operators[0], psi).normalized();
    CHECK(fidelity(psi, states::psi_plus()) == doctest::Approx(1.0).epsilon(1e-14));

    NoiseStream again(3, 9);
    NoiseStream first(3, 9);
    const auto r1 = run_jump_trajectory(states::phi_plus(), damp, 50, 0.01, Feedback::none, first);
    const auto r2 = run_jump_trajectory(states::phi_plus(), damp, 50, 0.01, Feedback::none, again);
    CHECK(r1.outcomes == r2.outcomes);
    for (std::size_t k = 0; k < r1.states.size(); ++k)
        for (std::size_t i = 0; i < 4; ++i) CHECK(r1.states[k][i] == r2.states[k][i]);
}

TEST_CASE("ensemble_propagate: closed two-member ensembles") {
    const auto deph = identity_unravelling(ChannelKind::dephasing, 0.01);
    WeightedEnsemble e{{states::phi_plus()}, 0.0};
    for (int k = 0; k < 100; ++k) {
        step_ensemble(e, deph, 0.01);
        CHECK(e.members.size() == 2);
        CHECK(e.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
        for (const auto& m : e.members)
            CHECK((fidelity(m, states::phi_plus()) > 1 - 1e-12 || fidelity(m, states::phi_minus()) > 1 - 1e-12));
    }
    CHECK(average_entanglement(e).mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.time == doctest::Approx(1.0));

    for (auto form : {StepForm::first_order, StepForm::exact}) {
        const auto damp = identity_unravelling(ChannelKind::damping, 0.01, form);
        const auto d = ensemble_propagate(states::psi_plus(), damp, 100, 0.01);
        REQUIRE(d.members.size() == 2);
        double p = 0.0;
        for (const auto& m : d.members) {
            const bool bell = fidelity(m, states::psi_plus()) > 1 - 1e-12;
            CHECK((bell || fidelity(m, states::ket00()) > 1 - 1e-12));
            if (bell) p = m.weight();
        }
        CHECK(average_entanglement(d).mean == doctest::Approx(p).epsilon(1e-12));
        if (form == StepForm::exact) CHECK(std::abs(p - std::exp(-1.0)) < 1e-12);
        else CHECK(std::abs(p - std::exp(-1.0)) < 0.01 * 0.5);
    }
}

TEST_CASE("reconstruct_rho matches the exact channel") {
    for (auto kind : {ChannelKind::dephasing, ChannelKind::damping}) {
        const PureState init = random_pure_state();
        const double dt = 1e-3;
        const std::size_t n = 1000;
        const Matrix exact = exact_rho(init, kind, 1.0, 1.0);
        const auto exact_steps = ensemble_propagate(init, identity_unravelling(kind, dt, StepForm::exact), n, dt);
        CHECK(trace_distance(reconstruct_rho(exact_steps), exact) < 1e-10);
        const auto first = ensemble_propagate(init, identity_unravelling(kind, dt), n, dt);
        CHECK(trace_distance(reconstruct_rho(first), exact) < 10.0 * n * dt * dt);
    }
    WeightedEnsemble one{{states::phi_plus().scaled(2.0)}, 0.0};
    CHECK(max_abs_diff(reconstruct_rho(one), states::phi_plus().projector()) < 1e-15);
    WeightedEnsemble bell{{states::phi_plus().scaled(std::sqrt(0.5)), states::phi_minus().scaled(std::sqrt(0.5))}, 0.0};
    const Matrix r = reconstruct_rho(bell);
    CHECK(std::abs(inner(states::phi_plus(), apply(r, states::phi_minus()))) < 1e-15);
    CHECK(max_abs_diff(r, 0.5 * (states::phi_plus().projector() + states::phi_minus().projector())) < 1e-15);
    CHECK_THROWS_AS(reconstruct_rho(WeightedEnsemble{}), PreconditionError);
}

TEST_CASE("ensemble merging") {
    UnravellingParams p;
    p.mix_a.theta = p.mix_b.theta = M_PI / 4;
    const ChannelSpec spec{ChannelKind::dephasing, 1.0, 0.02, StepForm::exact};
    const auto ch = unravelled_step(p, spec, spec);
    const auto merged = ensemble_propagate(states::phi_plus(), ch, 5, 0.02);
    const auto exact_merge = ensemble_propagate(states::phi_plus(), ch, 5, 0.02, {0.0, 4096, Feedback::none});
    CHECK(merged.members.size() <= exact_merge.members.size());
    CHECK(max_abs_diff(reconstruct_rho(merged), reconstruct_rho(exact_merge)) < 1e-8);
    CHECK(trace_distance(reconstruct_rho(merged), exact_rho(states::phi_plus(), ChannelKind::dephasing, 1.0, 0.1)) <
          1e-12);
    // 50-50 dephasing on a Bell state stays on a small lattice of states.
    const auto long_run = ensemble_propagate(states::phi_plus(), ch, 50, 0.02);
    CHECK(long_run.members.size() <= 4 * 50 + 1);

    UnravellingParams generic;
    generic.mix_a = {0.3, 0.7, 1.1};
    generic.mix_b = {1.0, 0.2, 0.4};
    const auto g = unravelled_step(generic, spec, spec);
    CHECK_THROWS_AS(ensemble_propagate(random_pure_state(), g, 50, 0.02, {1e-9, 256, Feedback::none}), BlowUpError);
}

TEST_CASE("average_entanglement") {
    WeightedEnsemble bell{{states::phi_plus().scaled(std::sqrt(0.5)), states::phi_minus().scaled(std::sqrt(0.5))}, 0.0};
    CHECK(average_entanglement(bell).mean == doctest::Approx(1.0));
    CHECK(average_entanglement(bell).std_error == 0.0);
    const double p = std::exp(-1.0);
    WeightedEnsemble damp{{states::psi_plus().scaled(std::sqrt(p)), states::ket00().scaled(std::sqrt(1 - p))}, 0.0};
    CHECK(average_entanglement(damp).mean == doctest::Approx(p).epsilon(1e-14));
    WeightedEnsemble product{{states::ket00()}, 0.0};
    CHECK(average_entanglement(product).mean == 0.0);

    const auto samples = std::vector<PureState>{states::phi_plus(), states::ket00()};
    const auto avg = average_entanglement(samples);
    CHECK(avg.mean == doctest::Approx(0.5));
    CHECK(avg.std_error == doctest::Approx(0.5));
}

TEST_CASE("Monte Carlo reconstructs the exact state") {
    for (auto kind : {ChannelKind::dephasing, ChannelKind::damping}) {
        const PureState init = random_pure_state();
        UnravellingParams p;
        p.mix_a = {0.4, 0.3, -0.2};
        const ChannelSpec spec{kind, 1.0, 0.01, StepForm::exact};
        const auto model = make_trajectory_model(p, spec, spec);
        BatchOptions opts;
        opts.n_traj = 4000;
        opts.seed = 99;
        opts.record_steps = {0, 50, 100};
        opts.accumulate_rho = true;
        const auto res = run_batch(init, model, opts);
        REQUIRE(res.rho.size() == 3);
        CHECK(trace_distance(res.rho[0], init.projector()) < 1e-12);
        CHECK(res.times[2] == doctest::Approx(1.0));
        CHECK(trace_distance(res.rho[2], exact_rho(init, kind, 1.0, 1.0)) < 3.0 / std::sqrt(4000.0));
    }
}

TEST_CASE("run_batch is independent of the thread count") {
    UnravellingParams p;
    p.mix_a.theta = 0.5;
    const ChannelSpec spec{ChannelKind::damping, 1.0, 0.01, StepForm::exact};
    const auto model = make_trajectory_model(p, spec, spec);
    BatchOptions opts;
    opts.n_traj = 300;
    opts.record_steps = {10, 40};
    opts.accumulate_rho = true;
    opts.threads = 1;
    const auto one = run_batch(states::psi_plus(), model, opts);
    opts.threads = 3;
    const auto three = run_batch(states::psi_plus(), model, opts);
    CHECK(one.mean == three.mean);
    CHECK(one.std_error == three.std_error);
    CHECK(max_abs_diff(one.rho[1], three.rho[1]) == 0.0);

    opts.seed = 43;
    CHECK(run_batch(states::psi_plus(), model, opts).mean != one.mean);
    opts.n_traj = 0;
    CHECK_THROWS_AS(run_batch(states::psi_plus(), model, opts), ConfigError);
}

TEST_CASE("worker_threads honours REL_ENT_THREADS") {
    ::setenv("REL_ENT_THREADS", "1", 1);
    CHECK(worker_threads() == 1);
    ::setenv("REL_ENT_THREADS", "zero", 1);
    CHECK_THROWS_AS(worker_threads(), ConfigError);
    ::unsetenv("REL_ENT_THREADS");
    CHECK(worker_threads() >= 1);
}

TEST_CASE("diffusive operators") {
    UnravellingParams p;
    p.diffusion_limit = true;
    const ChannelSpec spec{ChannelKind::dephasing, 1.0, 0.01};
    const auto model = diffusive_model(p, spec, spec);
    CHECK(max_abs_diff(diffusive_operator(model, {0.0, 0.0}), model.drift) == 0.0);
    // Dephasing drift: 1 - dt (both rates have g^dag g = gamma).
    CHECK(max_abs_diff(model.drift, (1.0 - 0.01) * Matrix::identity(4)) < 1e-15);
    // <Z (x) 1 + h.c.> vanishes on Phi+, so a zero-noise step is the drift alone.
    const auto m = record_drift(model, states::phi_plus());
    CHECK(std::abs(m[0]) < 1e-15);
    CHECK(std::abs(m[1]) < 1e-15);

    UnravellingParams bad = p;
    bad.mix_a.theta = 0.3;
    CHECK_THROWS_AS(diffusive_model(bad, spec, spec), ConfigError);
    CHECK_THROWS_AS(make_trajectory_model([] {
        UnravellingParams f;
        f.diffusion_limit = true;
        f.feedback = Feedback::phase_flip;
        return f;
    }(), spec, spec), ConfigError);
}

TEST_CASE("diffusive norm has zero mean at first order under the Gaussian measure") {
    UnravellingParams p;
    p.diffusion_limit = true;
    p.mix_b.phi = 0.8;
    for (auto kind : {ChannelKind::dephasing, ChannelKind::damping}) {
        const PureState psi = random_pure_state();
        for (double dt : {0.01, 0.001}) {
            const auto model = diffusive_model(p, {kind, 1.0, dt}, {kind, 1.0, dt});
            // Exact Gaussian average of |D_J psi|^2 with J dt ~ N(0, dt): the linear terms
            // vanish and the quadratic ones give dt <g^dag g>, cancelling the drift.
            const PureState k0 = apply(model.drift, psi);
            double mean = k0.weight();
            for (std::size_t s = 0; s < 2; ++s) mean += dt * apply(model.rates[s], psi).weight();
            CHECK(std::abs(mean - 1.0) < 2.0 * dt * dt);
        }
    }
}

TEST_CASE("diffusive trajectories reconstruct the channel") {
    UnravellingParams p;
    p.diffusion_limit = true;
    for (auto kind : {ChannelKind::dephasing, ChannelKind::damping}) {
        const PureState init = random_pure_state();
        const ChannelSpec spec{kind, 1.0, 0.005};
        const auto model = make_trajectory_model(p, spec, spec);
        REQUIRE(model.diffusive.has_value());
        BatchOptions opts;
        opts.n_traj = 2000;
        opts.record_steps = {100};
        opts.accumulate_rho = true;
        const auto res = run_batch(init, model, opts);
        // Statistical error plus the first-order integrator bias.
        CHECK(trace_distance(res.rho[0], exact_rho(init, kind, 1.0, 0.5)) < 3.0 / std::sqrt(2000.0) + 0.01);
    }
}
