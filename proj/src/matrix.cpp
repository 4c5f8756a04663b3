#include "mixq/matrix.hpp"

#include "mixq/kernels.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace mixq {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: shape mismatch (" + std::to_string(a.rows) + "x" +
                                    std::to_string(a.cols) + " * " + std::to_string(b.rows) +
                                    "x" + std::to_string(b.cols) + ")");
    }
    Matrix c(a.rows, b.cols);
    kernels::matmul(a.data.data(), b.data.data(), c.data.data(),
                    static_cast<std::size_t>(a.rows), static_cast<std::size_t>(a.cols),
                    static_cast<std::size_t>(b.cols));
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int r = 0; r < a.rows; ++r) {
        for (int c = 0; c < a.cols; ++c) {
            t.at(c, r) = a.at(r, c);
        }
    }
    return t;
}

static void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
}

Matrix add(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "sub");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
    return c;
}

void add_in_place(Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add_in_place");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void sub_in_place(Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "sub_in_place");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= b.data[i];
}

void scale_in_place(Matrix& a, double s) {
    for (double& v : a.data) v *= s;
}

void add_col_broadcast(Matrix& a, const Matrix& v) {
    if (v.rows != a.rows || v.cols != 1) {
        throw std::invalid_argument("add_col_broadcast: v must be rows x 1");
    }
    for (int r = 0; r < a.rows; ++r) {
        const double bias = v.at(r, 0);
        for (int c = 0; c < a.cols; ++c) a.at(r, c) += bias;
    }
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    }
    return m;
}

bool all_finite(const Matrix& a) {
    for (double v : a.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.same_shape(b) &&
           (a.data.empty() ||
            std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0);
}

} // namespace mixq
