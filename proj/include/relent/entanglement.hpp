#pragma once

// Two-qubit entanglement measures, in bits.
//
// Pure states: entropy of entanglement. Mixed states: entanglement of formation
// (Wootters), two bounds on the entanglement of assistance, and numerical
// searches over pure-state decompositions that bracket both extremes.

#include <cstdint>
#include <optional>
#include <vector>

#include "relent/linalg.hpp"

namespace relent {

// h(p) = -p log2 p - (1 - p) log2 (1 - p)
double binary_entropy(double p);

double entropy_of_entanglement(const PureState& state);

// (Y (x) Y) conj(rho) (Y (x) Y)
Matrix spin_flip(const Matrix& rho);

// Decreasing square roots of the eigenvalues of rho * spin_flip(rho).
std::vector<double> wootters_lambdas(const Matrix& rho);

double concurrence(const Matrix& rho);
double formation_from_concurrence(double c);
double entanglement_of_formation(const Matrix& rho);

// Sum of the Wootters lambdas.
double concurrence_of_assistance(const Matrix& rho);
// Upper bound on the entanglement of assistance: the fidelity between rho and its
// spin flip, which equals C_A. Equal to the concurrence (not the entropy) on pure states.
double ea_fidelity_bound(const Matrix& rho);
// Average entanglement of the spectral decomposition (eigenbasis as returned by
// hermitian_eig when the spectrum is degenerate).
double ea_eigenstate_bound(const Matrix& rho);

struct DecompositionSearch {
    int members = 8;
    int restarts = 16;
    // Objective evaluations per restart, split between simplex search and polish.
    int budget = 6000;
    std::uint64_t seed = 0x5eed;
};

struct DecompositionResult {
    double value = 0.0;
    bool converged = false;
    int evaluations = 0;
};

// Best decomposition average found by searching m x rank isometries applied to the
// eigen-ensemble: a lower bound on the entanglement of assistance.
DecompositionResult ea_numeric(const Matrix& rho, const DecompositionSearch& search = {});
// Same search, minimizing: an upper bound on the entanglement of formation.
DecompositionResult ef_numeric(const Matrix& rho, const DecompositionSearch& search = {});

// Average entanglement of the decomposition {sum_k U_ik v_k} with U = orthonormalized
// columns of the complex m x r matrix packed (re, im) in `packed`; v_k = sqrt(q_k) e_k.
// Exposed for tests.
double decomposition_average(const std::vector<PureState>& weighted_eigenvectors, int members,
                             const std::vector<double>& packed);

struct MixedStateBounds {
    double concurrence = 0.0;
    double e_formation = 0.0;
    double ea_fidelity_bound = 0.0;
    double ea_eigenstate_bound = 0.0;
};

MixedStateBounds mixed_state_bounds(const Matrix& rho);

struct EntanglementCurves {
    std::vector<double> times;
    std::vector<double> e_bar;
    std::vector<double> e_bar_stderr;
    std::vector<double> e_formation;
    std::vector<double> concurrence;
    std::vector<double> ea_fidelity_bound;
    std::vector<double> ea_eigenstate_bound;
    std::optional<std::vector<double>> ea_numeric;
    std::vector<double> outcome_entropy;
};

}  // namespace relent
