#pragma once

#include <cstddef>
#include <vector>

namespace mixq {

// Dense row-major matrix of 64-bit floats. All numeric modules share this
// type; every entry is required to be finite.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix identity(int n);

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// C = A * B, kernels-backed (see kernels.hpp for the summation-order contract)
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
void add_in_place(Matrix& a, const Matrix& b);
void sub_in_place(Matrix& a, const Matrix& b);
void scale_in_place(Matrix& a, double s);

// adds v (rows x 1) to every column of a
void add_col_broadcast(Matrix& a, const Matrix& v);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);
bool bitwise_equal(const Matrix& a, const Matrix& b);

} // namespace mixq
