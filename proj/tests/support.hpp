#pragma once

// Random generators and small independent helpers shared by the test suites.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "relent/linalg.hpp"

namespace relent::testing {

inline std::mt19937_64& rng() {
    static std::mt19937_64 engine(20240611);
    return engine;
}

inline Complex random_complex(std::mt19937_64& g = rng()) {
    std::normal_distribution<double> n;
    return {n(g), n(g)};
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& g = rng()) {
    Matrix m(rows, cols);
    for (auto& z : m.entries()) z = random_complex(g);
    return m;
}

inline Matrix random_hermitian(std::size_t n, std::mt19937_64& g = rng()) {
    const Matrix a = random_matrix(n, n, g);
    return 0.5 * (a + a.adjoint());
}

// Haar-ish unitary by Gram-Schmidt on a Gaussian matrix.
inline Matrix random_unitary(std::size_t n, std::mt19937_64& g = rng()) {
    Matrix u = random_matrix(n, n, g);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            Complex proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += std::conj(u(i, j)) * u(i, k);
            for (std::size_t i = 0; i < n; ++i) u(i, k) -= proj * u(i, j);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += std::norm(u(i, k));
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) u(i, k) /= norm;
    }
    return u;
}

inline PureState random_pure_state(std::mt19937_64& g = rng()) {
    PureState s(random_complex(g), random_complex(g), random_complex(g), random_complex(g));
    return s.normalized();
}

// Full-rank random density matrix G G^dag / tr.
inline Matrix random_density(std::size_t n = 4, std::mt19937_64& g = rng()) {
    const Matrix a = random_matrix(n, n, g);
    Matrix rho = a * a.adjoint();
    return rho * (1.0 / rho.trace().real());
}

// Random density matrix of the given rank.
inline Matrix random_density_rank(std::size_t rank, std::mt19937_64& g = rng()) {
    const Matrix a = random_matrix(4, rank, g);
    Matrix rho = a * a.adjoint();
    return rho * (1.0 / rho.trace().real());
}

inline double h2(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace relent::testing
