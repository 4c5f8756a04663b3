#pragma once

// Independent oracles for the test suites. Nothing here may call into the
// implementation paths it is used to check: the matmul is a plain ijk loop,
// the SVD is a hand-rolled one-sided Jacobi, the linear solver is Gaussian
// elimination with partial pivoting, and the nearest-code search is an
// exhaustive argmin.

#include "mixq/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracles {

inline mixq::Matrix matmul_ijk(const mixq::Matrix& a, const mixq::Matrix& b) {
    mixq::Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) {
                acc += a.at(i, k) * b.at(k, j);
            }
            c.at(i, j) = acc;
        }
    }
    return c;
}

inline std::size_t nearest_code_exhaustive(const std::vector<double>& values, double y) {
    std::size_t best = 0;
    double best_dist = std::fabs(values[0] - y);
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double d = std::fabs(values[i] - y);
        if (d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

// One-sided Jacobi SVD of an m x n matrix (m >= n not required; the matrix is
// transposed internally when needed). Returns all min(m, n) singular values,
// descending.
struct FullSvd {
    std::vector<double> singular_values;
    mixq::Matrix u; // m x k
    mixq::Matrix v; // n x k
};

inline FullSvd jacobi_svd(const mixq::Matrix& input) {
    const bool transposed = input.rows < input.cols;
    const mixq::Matrix a0 = transposed ? mixq::transpose(input) : input;
    const int m = a0.rows;
    const int n = a0.cols;

    // work on columns of a; v accumulates the right rotations
    mixq::Matrix a = a0;
    mixq::Matrix v = mixq::Matrix::identity(n);

    const double eps = 1e-14;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (int i = 0; i < m; ++i) {
                    alpha += a.at(i, p) * a.at(i, p);
                    beta += a.at(i, q) * a.at(i, q);
                    gamma += a.at(i, p) * a.at(i, q);
                }
                off = std::max(off, std::fabs(gamma) / std::sqrt(alpha * beta + 1e-300));
                if (std::fabs(gamma) < eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < m; ++i) {
                    const double ap = a.at(i, p);
                    const double aq = a.at(i, q);
                    a.at(i, p) = c * ap - s * aq;
                    a.at(i, q) = s * ap + c * aq;
                }
                for (int i = 0; i < n; ++i) {
                    const double vp = v.at(i, p);
                    const double vq = v.at(i, q);
                    v.at(i, p) = c * vp - s * vq;
                    v.at(i, q) = s * vp + c * vq;
                }
            }
        }
        if (off < eps) break;
    }

    std::vector<double> sigma(static_cast<std::size_t>(n));
    mixq::Matrix u(m, n);
    for (int j = 0; j < n; ++j) {
        double norm = 0.0;
        for (int i = 0; i < m; ++i) norm += a.at(i, j) * a.at(i, j);
        norm = std::sqrt(norm);
        sigma[static_cast<std::size_t>(j)] = norm;
        for (int i = 0; i < m; ++i) {
            u.at(i, j) = norm > 0.0 ? a.at(i, j) / norm : 0.0;
        }
    }

    // sort descending by sigma
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return sigma[static_cast<std::size_t>(x)] > sigma[static_cast<std::size_t>(y)];
    });

    FullSvd out;
    out.u = mixq::Matrix(m, n);
    out.v = mixq::Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        const int src = order[static_cast<std::size_t>(j)];
        out.singular_values.push_back(sigma[static_cast<std::size_t>(src)]);
        for (int i = 0; i < m; ++i) out.u.at(i, j) = u.at(i, src);
        for (int i = 0; i < n; ++i) out.v.at(i, j) = v.at(i, src);
    }
    if (transposed) std::swap(out.u, out.v);
    return out;
}

// Solves a x = b by Gaussian elimination with partial pivoting; a is n x n
// row-major, consumed by value.
inline std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        }
        if (a[pivot * n + col] == 0.0) throw std::runtime_error("gauss_solve: singular matrix");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
        x[i] = s / a[i * n + i];
    }
    return x;
}

} // namespace oracles
