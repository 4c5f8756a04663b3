#include "mixq/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixq {

const char* to_string(Activation a) {
    return a == Activation::ReLU ? "relu" : "tanh";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation: " + s);
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

Mlp make_mlp(const std::vector<int>& widths, Activation act, std::uint64_t seed) {
    if (widths.size() < 2) {
        throw std::invalid_argument("make_mlp: need at least input and output widths");
    }
    for (int w : widths) {
        if (w < 1) throw std::invalid_argument("make_mlp: widths must be positive");
    }
    Mlp m;
    m.widths = widths;
    m.activation = act;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        Matrix w(widths[l + 1], widths[l]);
        const double stddev = std::sqrt(2.0 / static_cast<double>(widths[l]));
        for (double& v : w.data) v = stddev * rng.normal();
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(widths[l + 1], 1);
    }
    return m;
}

double activation_apply(Activation a, double v) {
    return a == Activation::ReLU ? (v > 0.0 ? v : 0.0) : std::tanh(v);
}

double activation_grad(Activation a, double preact) {
    if (a == Activation::ReLU) return preact > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(preact);
    return 1.0 - t * t;
}

Matrix mlp_forward(const Mlp& m, const Matrix& x) {
    Matrix cur = x;
    for (int l = 0; l < m.num_layers(); ++l) {
        Matrix z = matmul(m.weights[static_cast<std::size_t>(l)], cur);
        add_col_broadcast(z, m.biases[static_cast<std::size_t>(l)]);
        if (l + 1 < m.num_layers()) {
            for (double& v : z.data) v = activation_apply(m.activation, v);
        }
        cur = std::move(z);
    }
    return cur;
}

ForwardCache mlp_forward_cached(const Mlp& m, const Matrix& x) {
    ForwardCache cache;
    Matrix cur = x;
    for (int l = 0; l < m.num_layers(); ++l) {
        cache.inputs.push_back(cur);
        Matrix z = matmul(m.weights[static_cast<std::size_t>(l)], cur);
        add_col_broadcast(z, m.biases[static_cast<std::size_t>(l)]);
        cache.preacts.push_back(z);
        if (l + 1 < m.num_layers()) {
            for (double& v : z.data) v = activation_apply(m.activation, v);
        }
        cur = std::move(z);
    }
    cache.output = std::move(cur);
    return cache;
}

MlpGradients mlp_backward(const Mlp& m, const ForwardCache& cache, const Matrix& d_output) {
    MlpGradients grads;
    grads.weights.resize(static_cast<std::size_t>(m.num_layers()));
    grads.biases.resize(static_cast<std::size_t>(m.num_layers()));

    Matrix delta = d_output; // dL/d(preact) of the current layer
    for (int l = m.num_layers() - 1; l >= 0; --l) {
        const std::size_t li = static_cast<std::size_t>(l);
        if (l + 1 < m.num_layers()) {
            // delta arrives as dL/d(activation output); fold in act'
            for (std::size_t i = 0; i < delta.data.size(); ++i) {
                delta.data[i] *= activation_grad(m.activation, cache.preacts[li].data[i]);
            }
        }
        grads.weights[li] = matmul(delta, transpose(cache.inputs[li]));
        Matrix bias_grad(delta.rows, 1);
        for (int r = 0; r < delta.rows; ++r) {
            double s = 0.0;
            for (int c = 0; c < delta.cols; ++c) s += delta.at(r, c);
            bias_grad.at(r, 0) = s;
        }
        grads.biases[li] = std::move(bias_grad);
        if (l > 0) delta = matmul(transpose(m.weights[li]), delta);
    }
    return grads;
}

double softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                             Matrix* d_logits) {
    if (static_cast<std::size_t>(logits.cols) != labels.size()) {
        throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
    }
    const int n = logits.cols;
    const int k = logits.rows;
    if (d_logits) *d_logits = Matrix(k, n);
    double total = 0.0;
    for (int c = 0; c < n; ++c) {
        double mx = logits.at(0, c);
        for (int r = 1; r < k; ++r) mx = std::max(mx, logits.at(r, c));
        double denom = 0.0;
        for (int r = 0; r < k; ++r) denom += std::exp(logits.at(r, c) - mx);
        const int y = labels[static_cast<std::size_t>(c)];
        total += -(logits.at(y, c) - mx) + std::log(denom);
        if (d_logits) {
            for (int r = 0; r < k; ++r) {
                const double p = std::exp(logits.at(r, c) - mx) / denom;
                d_logits->at(r, c) = (p - (r == y ? 1.0 : 0.0)) / static_cast<double>(n);
            }
        }
    }
    return total / static_cast<double>(n);
}

double mean_squared_error(const Matrix& output, const Matrix& targets, Matrix* d_output) {
    if (!output.same_shape(targets)) {
        throw std::invalid_argument("mean_squared_error: shape mismatch");
    }
    const double inv = 1.0 / static_cast<double>(output.data.size());
    double total = 0.0;
    if (d_output) *d_output = Matrix(output.rows, output.cols);
    for (std::size_t i = 0; i < output.data.size(); ++i) {
        const double diff = output.data[i] - targets.data[i];
        total += diff * diff;
        if (d_output) d_output->data[i] = 2.0 * diff * inv;
    }
    return total * inv;
}

} // namespace mixq
