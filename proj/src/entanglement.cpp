#include "relent/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "relent/errors.hpp"
#include "relent/search.hpp"

namespace relent {

namespace {

constexpr double kRankCutoff = 1e-12;

// Smaller eigenvalue of a unit-trace 2x2 Hermitian matrix with determinant det.
double smaller_eigenvalue(double det) {
    det = std::clamp(det, 0.0, 0.25);
    return 2.0 * det / (1.0 + std::sqrt(1.0 - 4.0 * det));
}

std::vector<PureState> weighted_eigenvectors(const Matrix& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError("expected a 4x4 density matrix");
    const auto eig = hermitian_eig(rho);
    std::vector<PureState> out;
    for (std::size_t k = 4; k-- > 0;) {
        if (eig.values[k] <= kRankCutoff) continue;
        PureState v;
        for (std::size_t i = 0; i < 4; ++i) v[i] = eig.vectors(i, k);
        out.push_back(v.scaled(std::sqrt(eig.values[k])));
    }
    return out;
}

DecompositionResult search_decompositions(const Matrix& rho, const DecompositionSearch& search, bool maximize) {
    const auto basis = weighted_eigenvectors(rho);
    if (basis.empty()) throw DegenerateError("density matrix has no support");
    if (basis.size() == 1) return {entropy_of_entanglement(basis.front()), true, 0};

    const int rank = static_cast<int>(basis.size());
    const int members = std::max(search.members, rank);
    const std::size_t dims = 2 * static_cast<std::size_t>(members) * rank;
    const double sign = maximize ? -1.0 : 1.0;
    const search::Objective objective = [&](const std::vector<double>& x) {
        return sign * decomposition_average(basis, members, x);
    };

    std::mt19937_64 rng(search.seed);
    std::normal_distribution<double> gauss;
    DecompositionResult best{maximize ? -1.0 : INFINITY, false, 0};
    const int restarts = std::max(1, search.restarts);
    const int simplex_budget = search.budget * 2 / 3;
    const int polish_budget = search.budget - simplex_budget;

    for (int r = 0; r < restarts; ++r) {
        std::vector<double> x0(dims, 0.0);
        if (r == 0) {
            // Start from the eigen-ensemble itself.
            for (int k = 0; k < rank; ++k) x0[2 * (static_cast<std::size_t>(k) * rank + k)] = 1.0;
        } else {
            for (auto& v : x0) v = gauss(rng);
        }
        search::NelderMeadOptions nm;
        nm.max_evaluations = simplex_budget;
        nm.initial_step = 0.3;
        auto coarse = search::nelder_mead(objective, x0, nm);
        search::QuasiNewtonOptions qn;
        qn.max_evaluations = polish_budget;
        auto fine = search::quasi_newton(objective, coarse.x, qn);
        const auto& winner = fine.value <= coarse.value ? fine : coarse;
        const double value = sign * winner.value;
        best.evaluations += coarse.evaluations + fine.evaluations;
        const bool better = maximize ? value > best.value : value < best.value;
        if (better) {
            best.value = value;
            best.converged = coarse.converged || fine.converged;
        }
    }
    best.value = std::clamp(best.value, 0.0, 1.0);
    return best;
}

}  // namespace

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log2(p) + (1.0 - p) * std::log1p(-p) / std::log(2.0));
}

double entropy_of_entanglement(const PureState& state) {
    const double w = state.weight();
    if (!(w > 0.0)) throw DegenerateError("entropy_of_entanglement of a zero vector");
    // Reduced state of qubit A.
    const double r00 = (std::norm(state[0]) + std::norm(state[1])) / w;
    const double r11 = (std::norm(state[2]) + std::norm(state[3])) / w;
    const Complex r01 = (state[0] * std::conj(state[2]) + state[1] * std::conj(state[3])) / w;
    return binary_entropy(smaller_eigenvalue(r00 * r11 - std::norm(r01)));
}

Matrix spin_flip(const Matrix& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError("spin_flip expects a 4x4 matrix");
    const Matrix yy = tensor_product(ops::pauli_y(), ops::pauli_y());
    return yy * rho.conjugate() * yy;
}

std::vector<double> wootters_lambdas(const Matrix& rho) {
    // With rho = X X^dag over its support (X = sqrt(q_k) e_k), the lambdas are the singular
    // values of the symmetric r x r matrix tau = X^T (Y (x) Y) X. Working on the support keeps
    // the zero lambdas of rank-deficient states exactly zero.
    const auto x = weighted_eigenvectors(rho);
    const std::size_t r = x.size();
    static constexpr double yy_sign[4] = {-1.0, 1.0, 1.0, -1.0};  // (Y (x) Y)|i> = sign_i |3 - i>
    Matrix tau(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t a = 0; a < 4; ++a) tau(i, j) += x[i][a] * yy_sign[3 - a] * x[j][3 - a];
    std::vector<double> lambdas(4, 0.0);
    if (r > 0) {
        const auto eig = hermitian_eig(tau.adjoint() * tau);
        for (std::size_t k = 0; k < r; ++k) lambdas[k] = std::sqrt(std::max(0.0, eig.values[r - 1 - k]));
    }
    return lambdas;
}

double concurrence(const Matrix& rho) {
    const auto l = wootters_lambdas(rho);
    return std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
}

double formation_from_concurrence(double c) {
    c = std::clamp(c, 0.0, 1.0);
    // Smaller eigenvalue (1 - sqrt(1 - c^2)) / 2, written to avoid cancellation.
    return binary_entropy(smaller_eigenvalue(c * c / 4.0));
}

double entanglement_of_formation(const Matrix& rho) { return formation_from_concurrence(concurrence(rho)); }

double concurrence_of_assistance(const Matrix& rho) {
    const auto l = wootters_lambdas(rho);
    return std::clamp(l[0] + l[1] + l[2] + l[3], 0.0, 1.0);
}

// F(rho, flip(rho)) = sum of the lambdas = C_A. Every pure two-qubit state has E <= C, so
// no decomposition average can exceed the largest average concurrence, which is C_A.
double ea_fidelity_bound(const Matrix& rho) { return concurrence_of_assistance(rho); }

double ea_eigenstate_bound(const Matrix& rho) {
    double total = 0.0;
    for (const auto& v : weighted_eigenvectors(rho)) total += v.weight() * entropy_of_entanglement(v);
    return total;
}

double decomposition_average(const std::vector<PureState>& basis, int members, const std::vector<double>& packed) {
    const std::size_t rank = basis.size();
    const std::size_t m = static_cast<std::size_t>(members);
    if (packed.size() != 2 * m * rank) throw DimensionError("decomposition_average: parameter count mismatch");

    // Columns of the m x rank matrix, orthonormalized by modified Gram-Schmidt.
    std::vector<Complex> u(m * rank);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < rank; ++k)
            u[i * rank + k] = Complex{packed[2 * (i * rank + k)], packed[2 * (i * rank + k) + 1]};
    for (std::size_t k = 0; k < rank; ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            Complex proj = 0.0;
            for (std::size_t i = 0; i < m; ++i) proj += std::conj(u[i * rank + j]) * u[i * rank + k];
            for (std::size_t i = 0; i < m; ++i) u[i * rank + k] -= proj * u[i * rank + j];
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < m; ++i) norm += std::norm(u[i * rank + k]);
        norm = std::sqrt(norm);
        if (norm < 1e-12) return NAN;
        for (std::size_t i = 0; i < m; ++i) u[i * rank + k] /= norm;
    }

    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        PureState member;
        for (std::size_t k = 0; k < rank; ++k)
            for (std::size_t a = 0; a < 4; ++a) member[a] += u[i * rank + k] * basis[k][a];
        const double w = member.weight();
        if (w > 1e-300) total += w * entropy_of_entanglement(member);
    }
    return total;
}

DecompositionResult ea_numeric(const Matrix& rho, const DecompositionSearch& search) {
    return search_decompositions(rho, search, true);
}

DecompositionResult ef_numeric(const Matrix& rho, const DecompositionSearch& search) {
    return search_decompositions(rho, search, false);
}

MixedStateBounds mixed_state_bounds(const Matrix& rho) {
    const auto l = wootters_lambdas(rho);
    MixedStateBounds b;
    b.concurrence = std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
    b.e_formation = formation_from_concurrence(b.concurrence);
    b.ea_fidelity_bound = std::clamp(l[0] + l[1] + l[2] + l[3], 0.0, 1.0);
    b.ea_eigenstate_bound = ea_eigenstate_bound(rho);
    return b;
}

}  // namespace relent
