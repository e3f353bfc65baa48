#include "relent/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "relent/errors.hpp"

namespace relent {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<Complex> entries)
    : rows_(rows), cols_(cols), data_(entries) {
    if (data_.size() != rows * cols) {
        throw DimensionError("matrix entry count " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

Matrix Matrix::conjugate() const {
    Matrix out = *this;
    for (auto& z : out.data_) z = std::conj(z);
    return out;
}

Complex Matrix::trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double Matrix::hermiticity_defect() const {
    if (!square()) return INFINITY;
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i; j < cols_; ++j)
            worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return worst;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("matrix sum shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw DimensionError("matrix difference shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (const auto& z : m.entries()) s += std::norm(z);
    return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("shape mismatch");
    double worst = 0.0;
    for (std::size_t k = 0; k < a.entries().size(); ++k)
        worst = std::max(worst, std::abs(a.entries()[k] - b.entries()[k]));
    return worst;
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

Matrix partial_trace(const Matrix& rho, Subsystem keep) {
    if (rho.rows() != 4 || rho.cols() != 4)
        throw DimensionError("partial_trace expects a 4x4 matrix, got " + std::to_string(rho.rows()) +
                             "x" + std::to_string(rho.cols()));
    Matrix out(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k) {
                if (keep == Subsystem::A)
                    out(i, j) += rho(2 * i + k, 2 * j + k);
                else
                    out(i, j) += rho(2 * k + i, 2 * k + j);
            }
    return out;
}

EigenDecomposition hermitian_eig(const Matrix& m) {
    if (!m.square()) throw DimensionError("hermitian_eig expects a square matrix");
    const std::size_t n = m.rows();
    double scale = 0.0;
    for (const auto& z : m.entries()) scale = std::max(scale, std::abs(z));
    if (m.hermiticity_defect() > 1e-10 * std::max(1.0, scale))
        throw PreconditionError("hermitian_eig: matrix is not Hermitian");

    Matrix a = m;
    Matrix v = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (off <= 1e-32 * std::max(scale * scale, 1e-300)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag < 1e-300) continue;
                const Complex phase = a(p, q) / mag;
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J = diag(1, conj(phase)) * [[c, s], [-s, c]] restricted to (p, q).
                const Complex jpp = c;
                const Complex jpq = s;
                const Complex jqp = -s * std::conj(phase);
                const Complex jqq = c * std::conj(phase);

                for (std::size_t k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * jpp + akq * jqp;
                    a(k, q) = akp * jpq + akq * jqq;
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = vkp * jpp + vkq * jqp;
                    v(k, q) = vkp * jpq + vkq * jqq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
                    a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

Matrix psd_sqrt(const Matrix& m) {
    const auto eig = hermitian_eig(m);
    const std::size_t n = m.rows();
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double lam = eig.values[k];
        if (lam < -1e-6) throw PreconditionError("psd_sqrt: eigenvalue " + std::to_string(lam) + " is negative");
        if (lam <= 0.0) continue;
        const double r = std::sqrt(lam);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += r * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    return out;
}

double trace_distance(const Matrix& a, const Matrix& b) {
    const auto eig = hermitian_eig(a - b);
    double s = 0.0;
    for (double lam : eig.values) s += std::abs(lam);
    return 0.5 * s;
}

double PureState::weight() const noexcept {
    double s = 0.0;
    for (const auto& z : amps_) s += std::norm(z);
    return s;
}

PureState PureState::normalized() const {
    const double w = weight();
    if (!(w > 0.0)) throw DegenerateError("cannot normalize a zero state vector");
    return scaled(1.0 / std::sqrt(w));
}

PureState PureState::scaled(Complex s) const {
    PureState out = *this;
    for (auto& z : out.amps_) z *= s;
    return out;
}

Matrix PureState::projector() const {
    Matrix out(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) out(i, j) = amps_[i] * std::conj(amps_[j]);
    return out;
}

Complex inner(const PureState& a, const PureState& b) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += std::conj(a[i]) * b[i];
    return s;
}

PureState apply(const Matrix& op, const PureState& state) {
    if (op.rows() != 4 || op.cols() != 4) throw DimensionError("operator must be 4x4 to act on a two-qubit state");
    PureState out;
    for (std::size_t i = 0; i < 4; ++i) {
        Complex s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += op(i, j) * state[j];
        out[i] = s;
    }
    return out;
}

namespace ops {
Matrix identity2() { return Matrix::identity(2); }
Matrix pauli_x() { return Matrix(2, 2, {0.0, 1.0, 1.0, 0.0}); }
Matrix pauli_y() { return Matrix(2, 2, {0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0}); }
Matrix pauli_z() { return Matrix(2, 2, {1.0, 0.0, 0.0, -1.0}); }
Matrix lowering() { return Matrix(2, 2, {0.0, 1.0, 0.0, 0.0}); }
}  // namespace ops

namespace states {
namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}
PureState ket00() { return {1.0, 0.0, 0.0, 0.0}; }
PureState phi_plus() { return {kInvSqrt2, 0.0, 0.0, kInvSqrt2}; }
PureState phi_minus() { return {kInvSqrt2, 0.0, 0.0, -kInvSqrt2}; }
PureState psi_plus() { return {0.0, kInvSqrt2, kInvSqrt2, 0.0}; }
PureState psi_minus() { return {0.0, kInvSqrt2, -kInvSqrt2, 0.0}; }
}  // namespace states

}  // namespace relent
