#include "mixq/workbench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mixq {

const char* to_string(AdapterInit i) {
    return i == AdapterInit::Loftq ? "loftq" : "gaussian";
}

AdapterInit adapter_init_from_string(const std::string& s) {
    if (s == "loftq") return AdapterInit::Loftq;
    if (s == "gaussian") return AdapterInit::Gaussian;
    throw std::invalid_argument("unknown adapter init: " + s);
}

std::size_t AssembledModel::trainable_parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.adapter.parameter_count();
    return n;
}

AssembledModel assemble(const PrunedModel& pruned, const QuantConfig& q,
                        const AssembleOptions& opts) {
    const Mlp& base = pruned.model;
    if (static_cast<int>(q.size()) != base.num_layers()) {
        throw std::invalid_argument("assemble: config length " + std::to_string(q.size()) +
                                    " != adapter-bearing layer count " +
                                    std::to_string(base.num_layers()));
    }
    AssembledModel model;
    model.widths = base.widths;
    model.activation = base.activation;
    model.config = q;
    Rng gauss_rng(mix_seed(opts.seed, 0xada9ull));
    for (int l = 0; l < base.num_layers(); ++l) {
        const std::size_t li = static_cast<std::size_t>(l);
        const int bits = q.bits[li];
        const Codebook cb = build_codebook(bits, opts.kinds.for_bits(bits));
        AssembledLayer layer;
        if (opts.init == AdapterInit::Loftq) {
            LoftqInit init = loftq_init(base.weights[li], cb, opts.block_size, opts.rank,
                                        opts.loftq_iterations);
            layer.frozen = std::move(init.q);
            layer.adapter = std::move(init.adapter);
        } else {
            layer.frozen = quantize(base.weights[li], cb, opts.block_size);
            layer.adapter = zero_adapter(base.weights[li].rows, base.weights[li].cols, opts.rank);
            for (double& v : layer.adapter.a.data) v = 0.02 * gauss_rng.normal();
        }
        layer.frozen_dense = dequantize(layer.frozen);
        layer.bias = base.biases[li];
        model.layers.push_back(std::move(layer));
    }
    return model;
}

namespace {

struct AssembledCache {
    std::vector<Matrix> inputs;  // per layer
    std::vector<Matrix> lowrank; // B * x per layer (rank > 0)
    std::vector<Matrix> preacts;
    Matrix output;
};

AssembledCache forward_cached(const AssembledModel& m, const Matrix& x) {
    AssembledCache cache;
    Matrix cur = x;
    for (int l = 0; l < m.num_layers(); ++l) {
        const AssembledLayer& layer = m.layers[static_cast<std::size_t>(l)];
        cache.inputs.push_back(cur);
        Matrix z = matmul(layer.frozen_dense, cur);
        add_col_broadcast(z, layer.bias);
        if (layer.adapter.rank > 0) {
            Matrix p = matmul(layer.adapter.b, cur);
            add_in_place(z, matmul(layer.adapter.a, p));
            cache.lowrank.push_back(std::move(p));
        } else {
            cache.lowrank.emplace_back();
        }
        cache.preacts.push_back(z);
        if (l + 1 < m.num_layers()) {
            for (double& v : z.data) v = activation_apply(m.activation, v);
        }
        cur = std::move(z);
    }
    cache.output = std::move(cur);
    return cache;
}

AdapterGradients backward_adapters(const AssembledModel& m, const AssembledCache& cache,
                                   const Matrix& d_output) {
    AdapterGradients grads;
    grads.a.resize(static_cast<std::size_t>(m.num_layers()));
    grads.b.resize(static_cast<std::size_t>(m.num_layers()));
    grads.bias.resize(static_cast<std::size_t>(m.num_layers()));

    Matrix delta = d_output;
    for (int l = m.num_layers() - 1; l >= 0; --l) {
        const std::size_t li = static_cast<std::size_t>(l);
        const AssembledLayer& layer = m.layers[li];
        if (l + 1 < m.num_layers()) {
            for (std::size_t i = 0; i < delta.data.size(); ++i) {
                delta.data[i] *= activation_grad(m.activation, cache.preacts[li].data[i]);
            }
        }
        if (layer.adapter.rank > 0) {
            grads.a[li] = matmul(delta, transpose(cache.lowrank[li]));
            grads.b[li] = matmul(matmul(transpose(layer.adapter.a), delta),
                                 transpose(cache.inputs[li]));
        } else {
            grads.a[li] = Matrix(layer.adapter.a.rows, layer.adapter.a.cols);
            grads.b[li] = Matrix(layer.adapter.b.rows, layer.adapter.b.cols);
        }
        Matrix bias_grad(delta.rows, 1);
        for (int r = 0; r < delta.rows; ++r) {
            double s = 0.0;
            for (int c = 0; c < delta.cols; ++c) s += delta.at(r, c);
            bias_grad.at(r, 0) = s;
        }
        grads.bias[li] = std::move(bias_grad);
        if (l > 0) {
            Matrix next = matmul(transpose(layer.frozen_dense), delta);
            if (layer.adapter.rank > 0) {
                add_in_place(next, matmul(transpose(layer.adapter.b),
                                          matmul(transpose(layer.adapter.a), delta)));
            }
            delta = std::move(next);
        }
    }
    return grads;
}

Matrix gather_cols(const Matrix& x, const std::vector<int>& order, int begin, int end) {
    Matrix out(x.rows, end - begin);
    for (int c = begin; c < end; ++c) {
        const int src = order[static_cast<std::size_t>(c)];
        for (int r = 0; r < x.rows; ++r) out.at(r, c - begin) = x.at(r, src);
    }
    return out;
}

double batch_loss(const Task& task, Split split, const Matrix& output,
                  const std::vector<int>& order, int begin, int end, Matrix* d_output) {
    if (task.is_classification()) {
        std::vector<int> labels(static_cast<std::size_t>(end - begin));
        const auto& all = task.labels(split);
        for (int c = begin; c < end; ++c) {
            labels[static_cast<std::size_t>(c - begin)] =
                all[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
        }
        return softmax_cross_entropy(output, labels, d_output);
    }
    const Matrix targets = gather_cols(task.targets(split), order, begin, end);
    return mean_squared_error(output, targets, d_output);
}

struct AdamState {
    std::vector<Matrix> m, v;
    int t = 0;

    void match(const std::vector<Matrix*>& params) {
        m.clear();
        v.clear();
        for (const Matrix* p : params) {
            m.emplace_back(p->rows, p->cols);
            v.emplace_back(p->rows, p->cols);
        }
    }

    void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
              const TrainHyper& h) {
        ++t;
        const double bc1 = 1.0 - std::pow(h.beta1, t);
        const double bc2 = 1.0 - std::pow(h.beta2, t);
        for (std::size_t p = 0; p < params.size(); ++p) {
            Matrix& param = *params[p];
            const Matrix& g = *grads[p];
            for (std::size_t i = 0; i < param.data.size(); ++i) {
                double& mi = m[p].data[i];
                double& vi = v[p].data[i];
                const double gi = g.data[i];
                mi = h.beta1 * mi + (1.0 - h.beta1) * gi;
                vi = h.beta2 * vi + (1.0 - h.beta2) * gi * gi;
                param.data[i] -= h.lr * (mi / bc1) / (std::sqrt(vi / bc2) + h.eps);
            }
        }
    }
};

} // namespace

Matrix assembled_forward(const AssembledModel& m, const Matrix& x) {
    Matrix cur = x;
    for (int l = 0; l < m.num_layers(); ++l) {
        const AssembledLayer& layer = m.layers[static_cast<std::size_t>(l)];
        Matrix z = matmul(layer.frozen_dense, cur);
        add_col_broadcast(z, layer.bias);
        if (layer.adapter.rank > 0) {
            add_in_place(z, matmul(layer.adapter.a, matmul(layer.adapter.b, cur)));
        }
        if (l + 1 < m.num_layers()) {
            for (double& v : z.data) v = activation_apply(m.activation, v);
        }
        cur = std::move(z);
    }
    return cur;
}

double evaluate(const AssembledModel& model, const Task& task, Split split) {
    return task_metric(task, split, assembled_forward(model, task.inputs(split)));
}

double evaluate(const Mlp& model, const Task& task, Split split) {
    return task_metric(task, split, mlp_forward(model, task.inputs(split)));
}

TrainReport train_adapters(AssembledModel& model, const Task& task, const TrainHyper& hyper) {
    if (hyper.epochs < 1) throw std::invalid_argument("train_adapters: epochs must be >= 1");

    std::vector<Matrix*> params;
    for (auto& layer : model.layers) {
        if (layer.adapter.rank > 0) {
            params.push_back(&layer.adapter.a);
            params.push_back(&layer.adapter.b);
        }
        if (hyper.train_biases) params.push_back(&layer.bias);
    }
    AdamState adam;
    adam.match(params);

    const int n_train = task.inputs(Split::Train).cols;
    std::vector<int> order(static_cast<std::size_t>(n_train));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(hyper.seed, 0x7a17ull));

    TrainReport report;
    report.epochs = hyper.epochs;
    report.seed = hyper.seed;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        int n_batches = 0;
        for (int begin = 0; begin < n_train; begin += hyper.batch) {
            const int end = std::min(begin + hyper.batch, n_train);
            const Matrix x = gather_cols(task.inputs(Split::Train), order, begin, end);
            const AssembledCache cache = forward_cached(model, x);
            Matrix d_output;
            const double loss =
                batch_loss(task, Split::Train, cache.output, order, begin, end, &d_output);
            if (!std::isfinite(loss)) {
                throw TrainingDiverged("train_adapters: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", batch " +
                                       std::to_string(n_batches));
            }
            epoch_loss += loss;
            ++n_batches;
            if (!params.empty()) {
                const AdapterGradients grads = backward_adapters(model, cache, d_output);
                std::vector<const Matrix*> gptrs;
                for (std::size_t l = 0; l < model.layers.size(); ++l) {
                    if (model.layers[l].adapter.rank > 0) {
                        gptrs.push_back(&grads.a[l]);
                        gptrs.push_back(&grads.b[l]);
                    }
                    if (hyper.train_biases) gptrs.push_back(&grads.bias[l]);
                }
                adam.step(params, gptrs, hyper);
            }
        }
        report.loss_curve.push_back(epoch_loss / std::max(1, n_batches));
        const double val = evaluate(model, task, Split::Val);
        if (val > report.metric || report.best_epoch < 0) {
            report.metric = val;
            report.best_epoch = epoch;
        }
    }
    return report;
}

TrainReport train_dense(Mlp& model, const Task& task, const TrainHyper& hyper) {
    if (hyper.epochs < 1) throw std::invalid_argument("train_dense: epochs must be >= 1");

    std::vector<Matrix*> params;
    for (auto& w : model.weights) params.push_back(&w);
    for (auto& b : model.biases) params.push_back(&b);
    AdamState adam;
    adam.match(params);

    const int n_train = task.inputs(Split::Train).cols;
    std::vector<int> order(static_cast<std::size_t>(n_train));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(hyper.seed, 0x7a17ull));

    TrainReport report;
    report.epochs = hyper.epochs;
    report.seed = hyper.seed;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        int n_batches = 0;
        for (int begin = 0; begin < n_train; begin += hyper.batch) {
            const int end = std::min(begin + hyper.batch, n_train);
            const Matrix x = gather_cols(task.inputs(Split::Train), order, begin, end);
            const ForwardCache cache = mlp_forward_cached(model, x);
            Matrix d_output;
            const double loss =
                batch_loss(task, Split::Train, cache.output, order, begin, end, &d_output);
            if (!std::isfinite(loss)) {
                throw TrainingDiverged("train_dense: non-finite loss at epoch " +
                                       std::to_string(epoch));
            }
            epoch_loss += loss;
            ++n_batches;
            const MlpGradients grads = mlp_backward(model, cache, d_output);
            std::vector<const Matrix*> gptrs;
            for (const auto& g : grads.weights) gptrs.push_back(&g);
            for (const auto& g : grads.biases) gptrs.push_back(&g);
            adam.step(params, gptrs, hyper);
        }
        report.loss_curve.push_back(epoch_loss / std::max(1, n_batches));
        const double val = evaluate(model, task, Split::Val);
        if (val > report.metric || report.best_epoch < 0) {
            report.metric = val;
            report.best_epoch = epoch;
        }
    }
    return report;
}

double assembled_loss(const AssembledModel& model, const Task& task, Split split,
                      int max_samples) {
    const Matrix& inputs = task.inputs(split);
    const int n = max_samples > 0 ? std::min(max_samples, inputs.cols) : inputs.cols;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const Matrix x = gather_cols(inputs, order, 0, n);
    const Matrix out = assembled_forward(model, x);
    return batch_loss(task, split, out, order, 0, n, nullptr);
}

AdapterGradients adapter_gradients(const AssembledModel& model, const Task& task, Split split,
                                   int max_samples) {
    const Matrix& inputs = task.inputs(split);
    const int n = max_samples > 0 ? std::min(max_samples, inputs.cols) : inputs.cols;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const Matrix x = gather_cols(inputs, order, 0, n);
    const AssembledCache cache = forward_cached(model, x);
    Matrix d_output;
    batch_loss(task, split, cache.output, order, 0, n, &d_output);
    return backward_adapters(model, cache, d_output);
}

} // namespace mixq
