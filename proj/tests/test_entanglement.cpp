#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "relent/entanglement.hpp"
#include "relent/errors.hpp"
#include "support.hpp"

using namespace relent;
using relent::testing::h2;
using relent::testing::random_density;
using relent::testing::random_density_rank;
using relent::testing::random_pure_state;
using relent::testing::random_unitary;

namespace {

// Independent oracles: pure-state concurrence 2|ad - bc| and entropy from the explicit
// reduced matrix eigenvalues.
double pure_concurrence(const PureState& s) {
    const PureState n = s.normalized();
    return 2.0 * std::abs(n[0] * n[3] - n[1] * n[2]);
}

double pure_entropy(const PureState& s) {
    const Matrix red = partial_trace(s.normalized().projector(), Subsystem::B);
    return h2(hermitian_eig(red).values.front());
}

Matrix bell_diagonal(double a, double b, double c, double d) {
    return a * states::phi_plus().projector() + b * states::phi_minus().projector() +
           c * states::psi_plus().projector() + d * states::psi_minus().projector();
}

Matrix damping_family(double p) {
    return p * states::psi_plus().projector() + (1.0 - p) * states::ket00().projector();
}

Matrix local_rotate(const Matrix& rho, const Matrix& ua, const Matrix& ub) {
    const Matrix u = tensor_product(ua, ub);
    return u * rho * u.adjoint();
}

DecompositionSearch quick_search() {
    DecompositionSearch s;
    s.members = 4;
    s.restarts = 4;
    s.budget = 3000;
    return s;
}

}  // namespace

TEST_CASE("binary_entropy") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(binary_entropy(0.125) == doctest::Approx(0.5435644431995964).epsilon(1e-12));
    for (double p : {1e-9, 0.01, 0.3, 0.77}) CHECK(std::abs(binary_entropy(p) - binary_entropy(1.0 - p)) < 1e-14);
}

TEST_CASE("entropy_of_entanglement examples") {
    CHECK(entropy_of_entanglement(states::phi_plus()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(entropy_of_entanglement(states::psi_minus()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(entropy_of_entanglement(states::ket00()) == 0.0);
    // cos(pi/8)|00> + sin(pi/8)|11>: Schmidt weights sin^2(pi/8) and cos^2(pi/8).
    const double c = std::cos(M_PI / 8), s = std::sin(M_PI / 8);
    CHECK(entropy_of_entanglement(PureState(c, 0.0, 0.0, s)) == doctest::Approx(h2(s * s)).epsilon(1e-12));
    // Unnormalized input is handled.
    CHECK(entropy_of_entanglement(states::phi_plus().scaled(3.0)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(entropy_of_entanglement(PureState()), DegenerateError);

    for (int trial = 0; trial < 50; ++trial) {
        const PureState psi = random_pure_state();
        CHECK(std::abs(entropy_of_entanglement(psi) - pure_entropy(psi)) < 1e-10);
    }
}

TEST_CASE("spin_flip") {
    CHECK(max_abs_diff(spin_flip(states::ket00().projector()), PureState(0, 0, 0, 1).projector()) < 1e-15);
    CHECK(max_abs_diff(spin_flip(states::phi_plus().projector()), states::phi_plus().projector()) < 1e-15);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix rho = random_density();
        CHECK(max_abs_diff(spin_flip(spin_flip(rho)), rho) < 1e-14);
    }
    CHECK_THROWS_AS(spin_flip(Matrix::identity(2)), DimensionError);
}

TEST_CASE("concurrence examples") {
    CHECK(concurrence(states::phi_plus().projector()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(concurrence(states::ket00().projector()) < 1e-9);
    CHECK(concurrence(0.25 * Matrix::identity(4)) == 0.0);

    // Bell-diagonal: C = max(0, 2 max w - 1).
    for (double p : {0.0, 0.2, 0.5, 0.6, 0.9, 1.0}) {
        const Matrix rho = bell_diagonal(p, 1.0 - p, 0.0, 0.0);
        CHECK(concurrence(rho) == doctest::Approx(std::abs(2.0 * p - 1.0)).epsilon(1e-8));
    }
    // Werner-like p Phi+ + (1-p) 1/4: C = max(0, (3p - 1) / 2).
    for (double p : {0.1, 1.0 / 3.0, 0.5, 0.8}) {
        const Matrix rho = p * states::phi_plus().projector() + (1.0 - p) * 0.25 * Matrix::identity(4);
        CHECK(concurrence(rho) == doctest::Approx(std::max(0.0, (3.0 * p - 1.0) / 2.0)).epsilon(1e-8));
    }
    // Damping family: one nonzero lambda equal to p.
    for (double p : {0.1, std::exp(-1.0), 0.9}) {
        const auto l = wootters_lambdas(damping_family(p));
        CHECK(l[0] == doctest::Approx(p).epsilon(1e-8));
        CHECK(l[1] + l[2] + l[3] < 1e-6);
    }
}

TEST_CASE("pure states: concurrence and entropy agree") {
    for (int trial = 0; trial < 50; ++trial) {
        const PureState psi = random_pure_state();
        const Matrix rho = psi.projector();
        const double c = concurrence(rho);
        CHECK(std::abs(c - pure_concurrence(psi)) < 1e-7);
        CHECK(std::abs(formation_from_concurrence(c) - entropy_of_entanglement(psi)) < 1e-6);
        CHECK(std::abs(formation_from_concurrence(pure_concurrence(psi)) - entropy_of_entanglement(psi)) < 1e-10);
    }
}

TEST_CASE("entanglement_of_formation monotone in concurrence") {
    CHECK(formation_from_concurrence(1.0) == doctest::Approx(1.0));
    CHECK(formation_from_concurrence(0.0) == 0.0);
    double previous = -1.0;
    for (int k = 0; k <= 1000; ++k) {
        const double v = formation_from_concurrence(k / 1000.0);
        CHECK(v >= previous);
        previous = v;
    }
    CHECK(entanglement_of_formation(damping_family(std::exp(-1.0))) == doctest::Approx(0.21918).epsilon(1e-4));
}

TEST_CASE("measures are invariant under local unitaries") {
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix rho = trial % 2 ? random_density() : random_density_rank(2);
        const Matrix moved = local_rotate(rho, random_unitary(2), random_unitary(2));
        const auto a = mixed_state_bounds(rho), b = mixed_state_bounds(moved);
        CHECK(std::abs(a.concurrence - b.concurrence) < 1e-9);
        CHECK(std::abs(a.e_formation - b.e_formation) < 1e-9);
        CHECK(std::abs(a.ea_fidelity_bound - b.ea_fidelity_bound) < 1e-9);
        CHECK(std::abs(a.ea_eigenstate_bound - b.ea_eigenstate_bound) < 1e-9);
    }
}

TEST_CASE("assistance bounds") {
    CHECK(ea_fidelity_bound(states::phi_plus().projector()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ea_fidelity_bound(states::ket00().projector()) < 1e-9);
    // On pure states the fidelity bound is the concurrence, and C_A fed through the
    // formation curve returns the entropy.
    for (int trial = 0; trial < 20; ++trial) {
        const PureState psi = random_pure_state();
        CHECK(std::abs(ea_fidelity_bound(psi.projector()) - pure_concurrence(psi)) < 1e-7);
        CHECK(ea_fidelity_bound(psi.projector()) >= entropy_of_entanglement(psi) - 1e-9);
        CHECK(std::abs(ea_eigenstate_bound(psi.projector()) - entropy_of_entanglement(psi)) < 1e-10);
    }
    CHECK(ea_eigenstate_bound(bell_diagonal(0.7, 0.3, 0.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ea_eigenstate_bound(bell_diagonal(0.1, 0.2, 0.3, 0.4)) == doctest::Approx(1.0).epsilon(1e-9));
    // Degenerate spectrum: the equal Phi+/Phi- mixture is diag(1/2, 0, 0, 1/2), whose returned
    // eigenbasis is the product basis.
    CHECK(ea_eigenstate_bound(bell_diagonal(0.5, 0.5, 0.0, 0.0)) < 1e-12);
    CHECK(ea_eigenstate_bound(0.25 * Matrix::identity(4)) <= 1.0);
    for (double p : {0.2, std::exp(-1.0), 0.8}) {
        CHECK(ea_fidelity_bound(damping_family(p)) == doctest::Approx(p).epsilon(1e-8));
        // Eigenvectors are Psi+ and |00>.
        CHECK(ea_eigenstate_bound(damping_family(p)) == doctest::Approx(p).epsilon(1e-9));
    }

    // Ordering on random states: E_F <= eigenstate bound <= C_A.
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix rho = random_density_rank(1 + trial % 4);
        const auto b = mixed_state_bounds(rho);
        CHECK(b.e_formation <= b.ea_eigenstate_bound + 1e-9);
        CHECK(b.ea_eigenstate_bound <= b.ea_fidelity_bound + 1e-9);
        CHECK(b.concurrence <= b.ea_fidelity_bound + 1e-12);
    }
}

TEST_CASE("decomposition_average") {
    const std::vector<PureState> basis{states::phi_plus().scaled(std::sqrt(0.5)), states::phi_minus().scaled(std::sqrt(0.5))};
    // Identity isometry: the eigen-ensemble.
    CHECK(decomposition_average(basis, 2, {1, 0, 0, 0, 0, 0, 1, 0}) == doctest::Approx(1.0));
    // Hadamard mixing gives |00> and |11>.
    CHECK(decomposition_average(basis, 2, {1, 0, 1, 0, 1, 0, -1, 0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isnan(decomposition_average(basis, 2, {1, 0, 1, 0, 1, 0, 1, 0})));
    CHECK_THROWS_AS(decomposition_average(basis, 2, {1, 0}), DimensionError);
}

TEST_CASE("numeric oracles: examples") {
    const auto search = quick_search();
    const PureState psi = random_pure_state();
    CHECK(ea_numeric(psi.projector(), search).value == doctest::Approx(entropy_of_entanglement(psi)).epsilon(1e-9));
    CHECK(ef_numeric(psi.projector(), search).value == doctest::Approx(entropy_of_entanglement(psi)).epsilon(1e-9));

    CHECK(ea_numeric(bell_diagonal(0.5, 0.5, 0.0, 0.0), search).value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ef_numeric(bell_diagonal(0.5, 0.5, 0.0, 0.0), search).value < 1e-6);
    CHECK(ef_numeric(0.25 * Matrix::identity(4), search).value < 1e-6);

    const Matrix damp = damping_family(std::exp(-1.0));
    CHECK(std::abs(ef_numeric(damp, search).value - entanglement_of_formation(damp)) < 2e-3);
    const double ea = ea_numeric(damp, search).value;
    CHECK(ea >= ea_fidelity_bound(damp) - 1e-3);
    CHECK(ea <= ea_fidelity_bound(damp) + 1e-9);

    CHECK_THROWS_AS(ea_numeric(Matrix(4, 4), search), DegenerateError);
}

TEST_CASE("numeric oracles bracket the closed forms") {
    const auto search = quick_search();
    for (int trial = 0; trial < 12; ++trial) {
        const Matrix rho = random_density_rank(2 + trial % 3);
        const auto b = mixed_state_bounds(rho);
        const double ef = ef_numeric(rho, search).value;
        const double ea = ea_numeric(rho, search).value;
        CHECK(std::abs(ef - b.e_formation) < 5e-3);
        CHECK(ef >= b.e_formation - 1e-9);
        CHECK(ea >= b.ea_eigenstate_bound - 1e-6);
        CHECK(ea <= b.ea_fidelity_bound + 1e-9);
    }
}
