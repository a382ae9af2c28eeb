#include "viscfp/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "viscfp/error.hpp"

namespace viscfp {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw Error(ErrorCode::InvalidSpec, "matrix must have at least one row and one column");
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols_) {
            throw Error(ErrorCode::InvalidSpec,
                        fmt::format("matrix row {} has {} entries, expected {}", i, rows[i].size(), m.cols_));
        }
        for (std::size_t j = 0; j < m.cols_; ++j) {
            if (!std::isfinite(rows[i][j])) {
                throw Error(ErrorCode::InvalidSpec, fmt::format("matrix entry ({}, {}) is not finite", i, j));
            }
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::frobenius_norm() const { return norm(std::span<const double>(data_)); }

Matrix operator*(const Matrix& a, const Matrix& b) {
    require_same_dim(a.cols(), b.rows(), "matrix product");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_dim(a.rows(), b.rows(), "matrix difference");
    require_same_dim(a.cols(), b.cols(), "matrix difference");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
    return c;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
    return c;
}

void multiply_into(const Matrix& a, std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] = inner(a.row(i), x);
}

void multiply_transpose_into(const Matrix& a, std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        const auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += r[j] * xi;
    }
}

Vector operator*(const Matrix& a, const Vector& x) {
    require_same_dim(a.cols(), x.dim(), "matrix-vector product");
    std::vector<double> out(a.rows());
    multiply_into(a, x.coords(), out);
    return Vector(std::move(out));
}

namespace {

void subtract_projection(std::vector<double>& v, const std::vector<double>& q) {
    const double c = inner(std::span<const double>(v), std::span<const double>(q));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
}

} // namespace

std::vector<Vector> null_space(const Matrix& a, double pivot_tol) {
    if (!(pivot_tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "pivot tolerance must be positive");
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    Matrix r = a;
    std::vector<std::size_t> pivot_cols;
    std::vector<std::size_t> free_cols;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = row;
        double best_abs = 0.0;
        for (std::size_t i = row; i < m; ++i) {
            if (std::abs(r(i, col)) > best_abs) {
                best_abs = std::abs(r(i, col));
                best = i;
            }
        }
        if (row >= m || best_abs <= pivot_tol) {
            free_cols.push_back(col);
            continue;
        }
        if (best != row)
            for (std::size_t j = 0; j < n; ++j) std::swap(r(row, j), r(best, j));
        const double p = r(row, col);
        for (std::size_t j = 0; j < n; ++j) r(row, j) /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row) continue;
            const double factor = r(i, col);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) r(i, j) -= factor * r(row, j);
        }
        pivot_cols.push_back(col);
        ++row;
    }

    std::vector<std::vector<double>> raw;
    raw.reserve(free_cols.size());
    for (const std::size_t f : free_cols) {
        std::vector<double> v(n, 0.0);
        v[f] = 1.0;
        for (std::size_t k = 0; k < pivot_cols.size(); ++k) v[pivot_cols[k]] = -r(k, f);
        raw.push_back(std::move(v));
    }

    std::vector<std::vector<double>> ortho;
    for (auto& v : raw) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : ortho) subtract_projection(v, q);
        const double len = norm(std::span<const double>(v));
        if (len <= pivot_tol) continue;
        for (auto& x : v) x /= len;
        ortho.push_back(std::move(v));
    }

    std::vector<Vector> basis;
    basis.reserve(ortho.size());
    for (auto& v : ortho) basis.emplace_back(std::move(v));
    return basis;
}

Matrix stack_rows(std::span<const Matrix> blocks) {
    if (blocks.empty()) throw Error(ErrorCode::InvalidSpec, "cannot stack zero blocks");
    const std::size_t n = blocks.front().cols();
    std::size_t total = 0;
    for (const auto& b : blocks) {
        require_same_dim(b.cols(), n, "stack_rows");
        total += b.rows();
    }
    Matrix out(total, n);
    std::size_t offset = 0;
    for (const auto& b : blocks) {
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < n; ++j) out(offset + i, j) = b(i, j);
        offset += b.rows();
    }
    return out;
}

} // namespace viscfp
