#include "mixq/adapters.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace mixq {

LoraAdapter zero_adapter(int d_out, int d_in, int rank) {
    LoraAdapter ad;
    ad.rank = rank;
    ad.a = Matrix(d_out, rank);
    ad.b = Matrix(rank, d_in);
    return ad;
}

Matrix lora_forward(const QuantizedMatrix& w_frozen, const LoraAdapter& adapter,
                    const Matrix& x, const Matrix& bias) {
    Matrix y = simulated_matmul(w_frozen, x);
    add_col_broadcast(y, bias);
    if (adapter.rank > 0) {
        add_in_place(y, matmul(matmul(adapter.a, adapter.b), x));
    }
    return y;
}

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::pair<Matrix, Matrix> truncated_svd(const Matrix& r_mat, int rank) {
    if (rank > std::min(r_mat.rows, r_mat.cols)) {
        throw std::invalid_argument("truncated_svd: rank exceeds min(rows, cols)");
    }
    if (!all_finite(r_mat)) {
        throw std::invalid_argument("truncated_svd: input has non-finite entries");
    }
    Matrix a(r_mat.rows, rank);
    Matrix b(rank, r_mat.cols);
    if (rank == 0) return {a, b};

    Eigen::Map<const EigenRowMajor> m(r_mat.data.data(), r_mat.rows, r_mat.cols);
    Eigen::JacobiSVD<EigenRowMajor> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw std::runtime_error("truncated_svd: SVD failed to converge");
    }
    const auto& u = svd.matrixU();
    const auto& v = svd.matrixV();
    const auto& sigma = svd.singularValues();

    for (int i = 0; i < rank; ++i) {
        // sign convention: first nonzero entry of u_i positive
        double flip = 1.0;
        for (int k = 0; k < u.rows(); ++k) {
            if (u(k, i) != 0.0) {
                flip = u(k, i) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        const double root = std::sqrt(sigma(i));
        for (int k = 0; k < r_mat.rows; ++k) a.at(k, i) = root * flip * u(k, i);
        for (int k = 0; k < r_mat.cols; ++k) b.at(i, k) = root * flip * v(k, i);
    }
    return {a, b};
}

LoftqInit loftq_init(const Matrix& w, const Codebook& codebook, int block_size, int rank,
                     int iterations) {
    if (iterations < 1) {
        throw std::invalid_argument("loftq_init: iterations must be >= 1");
    }
    if (rank < 0) {
        throw std::invalid_argument("loftq_init: rank must be >= 0");
    }

    LoftqInit init;
    init.iterations = iterations;
    init.adapter = zero_adapter(w.rows, w.cols, rank);

    Matrix update(w.rows, w.cols); // A*B of the previous step
    for (int t = 0; t < iterations; ++t) {
        init.q = quantize(sub(w, update), codebook, block_size);
        Matrix residual = sub(w, dequantize(init.q));
        if (rank > 0) {
            auto [a, b] = truncated_svd(residual, rank);
            init.adapter.a = std::move(a);
            init.adapter.b = std::move(b);
            update = matmul(init.adapter.a, init.adapter.b);
        }
        init.residual_history.push_back(frobenius_norm(sub(residual, update)));
    }
    init.residual_norm = init.residual_history.back();
    return init;
}

} // namespace mixq
