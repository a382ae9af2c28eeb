#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "viscfp/hilbert.hpp"

namespace viscfp {

/// Small dense row-major real matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Builds from nested rows; all rows must share one length.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data_).subspan(i * cols_, cols_);
    }

    [[nodiscard]] std::vector<std::vector<double>> to_rows() const;
    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] double frobenius_norm() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// out = A x. `out` must not alias `x`.
void multiply_into(const Matrix& a, std::span<const double> x, std::span<double> out);
/// out = A^T x. `out` must not alias `x`.
void multiply_transpose_into(const Matrix& a, std::span<const double> x, std::span<double> out);
Vector operator*(const Matrix& a, const Vector& x);

/// Orthonormal basis of the null space of A (rows x cols), returned as
/// vectors of length cols.
///
/// Gauss-Jordan elimination with partial pivoting; a column whose best
/// remaining pivot has magnitude <= pivot_tol is treated as free. The raw
/// null-space vectors from the reduced form are then orthonormalized with
/// two passes of modified Gram-Schmidt.
std::vector<Vector> null_space(const Matrix& a, double pivot_tol);

/// Vertical concatenation; all blocks must share the column count.
Matrix stack_rows(std::span<const Matrix> blocks);

} // namespace viscfp
