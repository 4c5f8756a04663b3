#pragma once

#include "mixq/matrix.hpp"
#include "mixq/quantizer.hpp"

#include <utility>
#include <vector>

namespace mixq {

// Low-rank factor pair attached to one layer. A is d_out x r, B is r x d_in;
// the trainable update is the product A*B, the host weight stays frozen.
struct LoraAdapter {
    Matrix a; // d_out x r
    Matrix b; // r x d_in
    int rank = 0;

    std::size_t parameter_count() const { return a.size() + b.size(); }
};

LoraAdapter zero_adapter(int d_out, int d_in, int rank);

// (dequantize(w_frozen) * x + bias) + (A*B) * x, bias broadcast per column
Matrix lora_forward(const QuantizedMatrix& w_frozen, const LoraAdapter& adapter,
                    const Matrix& x, const Matrix& bias);

// Best rank-r Frobenius approximation of r_mat: A = [sqrt(s_1) u_1 ...],
// B stacked so that A*B = U_r S_r V_r^T. Singular values descend; each u_i is
// sign-fixed so its first nonzero entry is positive.
std::pair<Matrix, Matrix> truncated_svd(const Matrix& r_mat, int rank);

struct LoftqInit {
    QuantizedMatrix q;
    LoraAdapter adapter;
    int iterations = 0;
    double residual_norm = 0.0;                // ||W - deq(Q) - A*B||_F after the last step
    std::vector<double> residual_history;      // one entry per iteration
};

// Alternates Q_t = quantize(W - A_{t-1}*B_{t-1}) with a rank-r SVD of the
// quantization residual W - deq(Q_t), starting from A = B = 0. rank == 0
// degenerates to plain quantization with an empty adapter.
LoftqInit loftq_init(const Matrix& w, const Codebook& codebook, int block_size, int rank,
                     int iterations);

} // namespace mixq
