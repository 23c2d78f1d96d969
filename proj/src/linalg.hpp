#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace seriesinv {

/// Row-major dense matrix, just big enough for the coefficient solves here.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double max_abs() const;
    std::vector<double> row(std::size_t r) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

struct LuFailure {
    std::size_t rank = 0;                // pivots accepted before the breakdown
    std::size_t pivot_column = 0;        // unknown column without a usable pivot
    std::size_t dependent_row_origin = 0; // original index of the row left without a pivot
};

struct LuSolution {
    Matrix x;                          // solution of A x = b (multi-RHS)
    std::vector<std::size_t> pivot_rows; // original row chosen as pivot for each column
};

/// Dense LU with partial pivoting. A pivot counts as zero when
/// |pivot| <= pivot_tol * max|A|. Returns nullopt (and fills `failure`
/// when given) if A is singular at that tolerance.
std::optional<LuSolution> lu_solve(const Matrix& a, const Matrix& b, double pivot_tol,
                                   LuFailure* failure = nullptr);

} // namespace seriesinv
