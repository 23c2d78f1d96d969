#include "linalg.hpp"

#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace seriesinv {

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> Matrix::row(std::size_t r) const {
    std::vector<double> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c);
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) fail(ErrorCode::Dimension, "matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

std::optional<LuSolution> lu_solve(const Matrix& a, const Matrix& b, double pivot_tol,
                                   LuFailure* failure) {
    if (a.rows() != a.cols()) fail(ErrorCode::Dimension, "lu_solve: matrix is not square");
    if (a.rows() != b.rows()) fail(ErrorCode::Dimension, "lu_solve: rhs row count mismatch");

    const std::size_t n = a.rows();
    Matrix lu = a;
    Matrix x = b;
    std::vector<std::size_t> origin(n); // origin[r] = original index of current row r
    std::iota(origin.begin(), origin.end(), 0);

    const double threshold = pivot_tol * std::max(lu.max_abs(), 1e-300);
    std::vector<std::size_t> pivot_rows(n, 0);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(lu(r, col)) > std::abs(lu(best, col))) best = r;
        if (std::abs(lu(best, col)) <= threshold) {
            if (failure) *failure = LuFailure{col, col, origin[col]};
            return std::nullopt;
        }
        if (best != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu(col, c), lu(best, c));
            for (std::size_t c = 0; c < x.cols(); ++c) std::swap(x(col, c), x(best, c));
            std::swap(origin[col], origin[best]);
        }
        pivot_rows[col] = origin[col];
        const double inv = 1.0 / lu(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = lu(r, col) * inv;
            if (f == 0.0) continue;
            lu(r, col) = 0.0;
            for (std::size_t c = col + 1; c < n; ++c) lu(r, c) -= f * lu(col, c);
            for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) -= f * x(col, c);
        }
    }

    for (std::size_t col = n; col-- > 0;) {
        const double inv = 1.0 / lu(col, col);
        for (std::size_t c = 0; c < x.cols(); ++c) {
            double v = x(col, c);
            for (std::size_t k = col + 1; k < n; ++k) v -= lu(col, k) * x(k, c);
            x(col, c) = v * inv;
        }
    }

    return LuSolution{std::move(x), std::move(pivot_rows)};
}

} // namespace seriesinv
