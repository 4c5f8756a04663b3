#pragma once

#include "mixq/adapters.hpp"
#include "mixq/costmodel.hpp"
#include "mixq/pruner.hpp"
#include "mixq/quantconfig.hpp"
#include "mixq/task.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixq {

enum class AdapterInit : std::uint8_t { Loftq = 0, Gaussian = 1 };

const char* to_string(AdapterInit i);
AdapterInit adapter_init_from_string(const std::string& s);

struct AssembleOptions {
    int rank = 4;
    AdapterInit init = AdapterInit::Loftq;
    int loftq_iterations = 1;
    int block_size = 64;
    CodecKinds kinds;
    std::uint64_t seed = 0; // consumed only by the Gaussian adapter init
};

// One layer of the assembled model: frozen quantized base, trainable low-rank
// adapter, full-precision bias. The dequantized base is cached once; the
// codes and scales are never touched after assembly.
struct AssembledLayer {
    QuantizedMatrix frozen;
    Matrix frozen_dense;
    LoraAdapter adapter;
    Matrix bias;
};

struct AssembledModel {
    std::vector<AssembledLayer> layers;
    std::vector<int> widths;
    Activation activation = Activation::ReLU;
    QuantConfig config;

    int num_layers() const { return static_cast<int>(layers.size()); }
    std::size_t trainable_parameter_count() const;
};

// Per layer i: LoftQ init (Q_i with its adapter) at q_i bits, or plain
// quantization with A ~ N(0, 0.02^2), B = 0. Biases stay full precision.
AssembledModel assemble(const PrunedModel& pruned, const QuantConfig& q,
                        const AssembleOptions& opts);

Matrix assembled_forward(const AssembledModel& m, const Matrix& x);

struct TrainHyper {
    int epochs = 50;
    double lr = 3e-3;
    int batch = 32;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool train_biases = false;
    std::uint64_t seed = 0;
};

struct TrainReport {
    double metric = 0.0; // best-val-epoch P, in [0, 1]
    std::vector<double> loss_curve;
    int epochs = 0;
    int best_epoch = -1;
    std::uint64_t seed = 0;
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Seeded minibatch Adam over the adapter factors (and optionally biases);
// frozen base codes never change. Throws TrainingDiverged on non-finite loss.
TrainReport train_adapters(AssembledModel& model, const Task& task, const TrainHyper& hyper);

double evaluate(const AssembledModel& model, const Task& task, Split split);
double evaluate(const Mlp& model, const Task& task, Split split);

// Full-precision training of a dense model with the same Adam loop; used to
// pretrain the toy model before pruning and as the task-learnability oracle.
TrainReport train_dense(Mlp& model, const Task& task, const TrainHyper& hyper);

// mean loss of the assembled model on a split (first max_samples columns;
// <= 0 means the whole split)
double assembled_loss(const AssembledModel& model, const Task& task, Split split,
                      int max_samples = 0);

struct AdapterGradients {
    std::vector<Matrix> a;
    std::vector<Matrix> b;
    std::vector<Matrix> bias;
};

// Analytic gradients of assembled_loss w.r.t. every adapter factor; the
// finite-difference checks drive this directly.
AdapterGradients adapter_gradients(const AssembledModel& model, const Task& task, Split split,
                                   int max_samples = 0);

} // namespace mixq
