#pragma once

#include "mixq/matrix.hpp"
#include "mixq/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mixq {

enum class TaskKind : std::uint8_t { BlobsClassify = 0, TeacherRegress = 1 };

const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

struct TaskSizes {
    int train = 512;
    int val = 256;
    int test = 256;
};

struct TaskSpec {
    TaskKind kind = TaskKind::BlobsClassify;
    std::uint64_t seed = 0;
    TaskSizes sizes;
    int input_dim = 16;
    int output_dim = 16;      // classes for BlobsClassify, target dim otherwise
    double separation = 10.0; // cluster centers ~ N(0, separation^2) per dim
    double noise = 0.05;      // target noise for TeacherRegress
};

// Synthetic dataset with disjoint train/val/test splits, fully determined by
// the spec (one RNG stream, splits drawn in order).
struct Task {
    TaskSpec spec;
    Matrix train_x, val_x, test_x;            // input_dim x n
    std::vector<int> train_y, val_y, test_y;  // BlobsClassify labels
    Matrix train_t, val_t, test_t;            // TeacherRegress targets

    const Matrix& inputs(Split s) const;
    const std::vector<int>& labels(Split s) const;
    const Matrix& targets(Split s) const;
    bool is_classification() const { return spec.kind == TaskKind::BlobsClassify; }
};

Task make_task(const TaskSpec& spec);

// loss of `output` against the split's ground truth; d_output optional
double task_loss(const Task& task, Split split, const Matrix& output, Matrix* d_output);

// accuracy for classification (argmax, ties to the lower class index),
// 1/(1+MSE) for regression; always in [0, 1]
double task_metric(const Task& task, Split split, const Matrix& output);

} // namespace mixq
