#pragma once

// Dense complex linear algebra for the 2x2 and 4x4 objects of a two-qubit system.
//
// Basis ordering is fixed across the whole library: |00>, |01>, |10>, |11>, with
// qubit A as the left (slow) index.

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace relent {

using Complex = std::complex<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    // Row-major entries; the count must equal rows*cols.
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<Complex> entries);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix diagonal(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const noexcept {
        return data_[i * cols_ + j];
    }

    std::span<const Complex> entries() const noexcept { return data_; }
    std::span<Complex> entries() noexcept { return data_; }

    Matrix adjoint() const;
    Matrix conjugate() const;
    Complex trace() const;

    // Largest entrywise deviation from the adjoint.
    double hermiticity_defect() const;
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(Complex s);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, Complex s) { return a *= s; }
    friend Matrix operator*(Complex s, Matrix a) { return a *= s; }
    friend Matrix operator*(const Matrix& a, const Matrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

double frobenius_norm(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

Matrix tensor_product(const Matrix& a, const Matrix& b);

enum class Subsystem { A, B };

// Reduced 2x2 state of a 4x4 two-qubit density matrix.
Matrix partial_trace(const Matrix& rho, Subsystem keep);

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column k pairs with values[k]
};

// Cyclic complex Jacobi; intended for dimensions <= 8.
EigenDecomposition hermitian_eig(const Matrix& m);

// Eigenvalues in [-1e-10, 0) are clipped to zero; anything below -1e-6 is rejected.
Matrix psd_sqrt(const Matrix& m);

// 0.5 * sum |eigenvalues(a - b)| for Hermitian a, b.
double trace_distance(const Matrix& a, const Matrix& b);

// Two-qubit pure state, possibly unnormalized. weight() is the squared norm, which is
// the ensemble probability when the state is a member of a decomposition.
class PureState {
public:
    using Amplitudes = std::array<Complex, 4>;

    PureState() = default;
    explicit PureState(const Amplitudes& amplitudes) : amps_(amplitudes) {}
    PureState(Complex a00, Complex a01, Complex a10, Complex a11) : amps_{a00, a01, a10, a11} {}

    const Amplitudes& amplitudes() const noexcept { return amps_; }
    Complex operator[](std::size_t i) const noexcept { return amps_[i]; }
    Complex& operator[](std::size_t i) noexcept { return amps_[i]; }

    double weight() const noexcept;
    PureState normalized() const;
    PureState scaled(Complex s) const;

    // |phi><phi| of the stored (unnormalized) vector.
    Matrix projector() const;

private:
    Amplitudes amps_{};
};

Complex inner(const PureState& a, const PureState& b);  // <a|b>
PureState apply(const Matrix& op, const PureState& state);

namespace ops {
Matrix identity2();
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
// |0><1|, the qubit lowering operator.
Matrix lowering();
}  // namespace ops

namespace states {
PureState ket00();
PureState phi_plus();
PureState phi_minus();
PureState psi_plus();
PureState psi_minus();
}  // namespace states

}  // namespace relent
