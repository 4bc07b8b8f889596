#include "ozonecast/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "ozonecast/errors.hpp"

namespace ozonecast {

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) throw DimensionMismatch("matvec: size mismatch");
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        const auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) s += row[c] * x[c];
        out[r] = s;
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matmul: size mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

Matrix gram(const Matrix& a) {
    Matrix out(a.cols(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double v = row[p];
            if (v == 0.0) continue;
            for (std::size_t q = p; q < a.cols(); ++q) out(p, q) += v * row[q];
        }
    }
    for (std::size_t p = 0; p < a.cols(); ++p)
        for (std::size_t q = 0; q < p; ++q) out(p, q) = out(q, p);
    return out;
}

std::vector<double> transpose_matvec(const Matrix& a, std::span<const double> y) {
    if (y.size() != a.rows()) throw DimensionMismatch("transpose_matvec: size mismatch");
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double yr = y[r];
        if (yr == 0.0) continue;
        const auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) out[c] += row[c] * yr;
    }
    return out;
}

Cholesky::Cholesky(const Matrix& a) : l_(a.rows(), a.cols()) {
    const std::size_t n = a.rows();
    if (a.cols() != n) return;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return;
        const double lj = std::sqrt(d);
        l_(j, j) = lj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
            l_(i, j) = s / lj;
        }
    }
    ok_ = true;
}

std::vector<double> Cholesky::solve(std::span<const double> b) const {
    const std::size_t n = l_.rows();
    if (!ok_) throw SingularDesign("cholesky solve on non-SPD matrix");
    if (b.size() != n) throw DimensionMismatch("cholesky solve: size mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
        y[i] = s / l_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * y[k];
        y[ii] = s / l_(ii, ii);
    }
    return y;
}

Matrix Cholesky::inverse() const {
    const std::size_t n = l_.rows();
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const auto col = solve(e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    return inv;
}

PivotedQr::PivotedQr(Matrix a, double rel_tol)
    : qr_(std::move(a)), rows_(qr_.rows()), cols_(qr_.cols()) {
    if (rows_ < cols_) throw DimensionMismatch("qr: need rows >= cols");
    beta_.assign(cols_, 0.0);
    perm_.resize(cols_);
    for (std::size_t j = 0; j < cols_; ++j) perm_[j] = j;

    std::vector<double> colnorm(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += qr_(i, j) * qr_(i, j);
        colnorm[j] = s;
    }

    double r00 = 0.0;
    for (std::size_t k = 0; k < cols_; ++k) {
        // pivot: bring the column with the largest remaining norm to position k
        std::size_t best = k;
        for (std::size_t j = k + 1; j < cols_; ++j)
            if (colnorm[j] > colnorm[best]) best = j;
        if (best != k) {
            for (std::size_t i = 0; i < rows_; ++i) std::swap(qr_(i, k), qr_(i, best));
            std::swap(colnorm[k], colnorm[best]);
            std::swap(perm_[k], perm_[best]);
        }

        double norm = 0.0;
        for (std::size_t i = k; i < rows_; ++i) norm += qr_(i, k) * qr_(i, k);
        norm = std::sqrt(norm);
        if (k == 0) r00 = norm;
        if (!(norm > rel_tol * r00) || norm == 0.0) {
            rank_ = k;
            return;
        }

        // Householder vector v = x - alpha e1, stored below the diagonal
        const double alpha = qr_(k, k) >= 0.0 ? -norm : norm;
        const double vk = qr_(k, k) - alpha;
        qr_(k, k) = alpha;
        for (std::size_t i = k + 1; i < rows_; ++i) qr_(i, k) /= vk;
        beta_[k] = -vk / alpha;  // = 2 / (vᵀv) scaled for v normalized to v_k = 1

        for (std::size_t j = k + 1; j < cols_; ++j) {
            double s = qr_(k, j);
            for (std::size_t i = k + 1; i < rows_; ++i) s += qr_(i, k) * qr_(i, j);
            s *= beta_[k];
            qr_(k, j) -= s;
            for (std::size_t i = k + 1; i < rows_; ++i) qr_(i, j) -= qr_(i, k) * s;
            colnorm[j] -= qr_(k, j) * qr_(k, j);
            if (colnorm[j] < 0.0) colnorm[j] = 0.0;
        }
    }
    rank_ = cols_;
}

std::vector<double> PivotedQr::apply_qt(std::span<const double> b) const {
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t k = 0; k < rank_; ++k) {
        double s = y[k];
        for (std::size_t i = k + 1; i < rows_; ++i) s += qr_(i, k) * y[i];
        s *= beta_[k];
        y[k] -= s;
        for (std::size_t i = k + 1; i < rows_; ++i) y[i] -= qr_(i, k) * s;
    }
    return y;
}

std::vector<double> PivotedQr::solve(std::span<const double> b) const {
    if (!full_rank()) throw SingularDesign("qr solve: rank deficient");
    if (b.size() != rows_) throw DimensionMismatch("qr solve: size mismatch");
    auto y = apply_qt(b);
    std::vector<double> xp(cols_);
    for (std::size_t ii = cols_; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < cols_; ++j) s -= qr_(ii, j) * xp[j];
        xp[ii] = s / qr_(ii, ii);
    }
    std::vector<double> x(cols_);
    for (std::size_t k = 0; k < cols_; ++k) x[perm_[k]] = xp[k];
    return x;
}

Matrix PivotedQr::gram_inverse() const {
    if (!full_rank()) throw SingularDesign("gram inverse: rank deficient");
    // R⁻¹ by back substitution on the identity
    Matrix rinv(cols_, cols_);
    for (std::size_t j = 0; j < cols_; ++j) {
        for (std::size_t ii = j + 1; ii-- > 0;) {
            double s = (ii == j) ? 1.0 : 0.0;
            for (std::size_t k = ii + 1; k <= j; ++k) s -= qr_(ii, k) * rinv(k, j);
            rinv(ii, j) = s / qr_(ii, ii);
        }
    }
    // (AᵀA)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ
    Matrix out(cols_, cols_);
    for (std::size_t i = 0; i < cols_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (std::size_t k = std::max(i, j); k < cols_; ++k) s += rinv(i, k) * rinv(j, k);
            out(perm_[i], perm_[j]) = s;
        }
    return out;
}

double PivotedQr::quad_form(std::span<const double> z) const {
    if (!full_rank()) throw SingularDesign("quad form: rank deficient");
    if (z.size() != cols_) throw DimensionMismatch("quad form: size mismatch");
    // zᵀ(AᵀA)⁻¹z = ||R⁻ᵀ Pᵀ z||²
    std::vector<double> u(cols_);
    for (std::size_t i = 0; i < cols_; ++i) {
        double s = z[perm_[i]];
        for (std::size_t k = 0; k < i; ++k) s -= qr_(k, i) * u[k];
        u[i] = s / qr_(i, i);
    }
    double h = 0.0;
    for (double v : u) h += v * v;
    return h;
}

}  // namespace ozonecast
