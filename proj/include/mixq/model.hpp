#pragma once

#include "mixq/matrix.hpp"
#include "mixq/rng.hpp"

#include <string>
#include <vector>

namespace mixq {

enum class Activation : std::uint8_t { ReLU = 0, Tanh = 1 };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Seeded multi-layer perceptron over 64-bit floats. widths[0] is the input
// dimension, widths.back() the output dimension; layer l maps level l to
// level l+1 with weight widths[l+1] x widths[l] plus bias. The last layer is
// linear, all others apply the activation.
struct Mlp {
    std::vector<int> widths;
    std::vector<Matrix> weights;
    std::vector<Matrix> biases; // widths[l+1] x 1
    Activation activation = Activation::ReLU;

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }
    std::size_t parameter_count() const;
};

// He-style scaled normal init, fully determined by the seed
Mlp make_mlp(const std::vector<int>& widths, Activation act, std::uint64_t seed);

// x is input_dim x n; returns output_dim x n logits/outputs
Matrix mlp_forward(const Mlp& m, const Matrix& x);

// Forward pass with per-layer caches for backprop
struct ForwardCache {
    std::vector<Matrix> inputs;      // activation entering each layer
    std::vector<Matrix> preacts;     // W*x + b per layer
    Matrix output;                   // final linear output
};
ForwardCache mlp_forward_cached(const Mlp& m, const Matrix& x);

struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
};

// Given dL/d(output), walks the cached forward pass backwards
MlpGradients mlp_backward(const Mlp& m, const ForwardCache& cache, const Matrix& d_output);

// mean cross-entropy over columns of logits (classes x n); also emits
// dL/dlogits for the mean loss
double softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                             Matrix* d_logits);

// mean over samples and dims of squared error; emits dL/doutput
double mean_squared_error(const Matrix& output, const Matrix& targets, Matrix* d_output);

double activation_apply(Activation a, double v);
double activation_grad(Activation a, double preact);

} // namespace mixq
