#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ozonecast {

// Dense row-major matrix of doubles. Small problems only (tens of columns);
// everything here is written for clarity and determinism, not BLAS speed.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::vector<double> matvec(const Matrix& a, std::span<const double> x);
Matrix matmul(const Matrix& a, const Matrix& b);
// aᵀa
Matrix gram(const Matrix& a);
// aᵀy
std::vector<double> transpose_matvec(const Matrix& a, std::span<const double> y);

// Cholesky factorization of a symmetric positive-definite matrix.
// ok() is false when a pivot is non-positive (matrix not SPD).
class Cholesky {
public:
    explicit Cholesky(const Matrix& a);
    bool ok() const { return ok_; }
    std::vector<double> solve(std::span<const double> b) const;
    Matrix inverse() const;

private:
    Matrix l_;
    bool ok_ = false;
};

// Householder QR with column pivoting of an m-by-n matrix (m >= n).
// Diagonal entries of R decay with pivoting, so the rank test compares
// |R_kk| against rel_tol * |R_00|.
class PivotedQr {
public:
    explicit PivotedQr(Matrix a, double rel_tol = 1e-10);

    std::size_t rank() const { return rank_; }
    bool full_rank() const { return rank_ == cols_; }
    std::size_t cols() const { return cols_; }

    // Least-squares solution of A x = b. Requires full rank.
    std::vector<double> solve(std::span<const double> b) const;

    // (AᵀA)⁻¹, permutation applied. Requires full rank.
    Matrix gram_inverse() const;

    // zᵀ (AᵀA)⁻¹ z via a single triangular solve. Requires full rank.
    double quad_form(std::span<const double> z) const;

private:
    std::vector<double> apply_qt(std::span<const double> b) const;

    Matrix qr_;                      // R in the upper triangle, reflectors below
    std::vector<double> beta_;       // Householder scalars
    std::vector<std::size_t> perm_;  // column permutation: A[:, perm[k]] is the k-th factored column
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t rank_ = 0;
};

}  // namespace ozonecast
