#include "mixq/task.hpp"

#include <stdexcept>

namespace mixq {

const char* to_string(TaskKind k) {
    return k == TaskKind::BlobsClassify ? "blobs_classify" : "teacher_regress";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "blobs_classify" || s == "blobs") return TaskKind::BlobsClassify;
    if (s == "teacher_regress" || s == "teacher") return TaskKind::TeacherRegress;
    throw std::invalid_argument("unknown task kind: " + s);
}

const Matrix& Task::inputs(Split s) const {
    switch (s) {
    case Split::Train: return train_x;
    case Split::Val: return val_x;
    default: return test_x;
    }
}

const std::vector<int>& Task::labels(Split s) const {
    switch (s) {
    case Split::Train: return train_y;
    case Split::Val: return val_y;
    default: return test_y;
    }
}

const Matrix& Task::targets(Split s) const {
    switch (s) {
    case Split::Train: return train_t;
    case Split::Val: return val_t;
    default: return test_t;
    }
}

namespace {

void fill_blobs_split(Rng& rng, const TaskSpec& spec, const std::vector<Matrix>& centers,
                      int n, Matrix& x, std::vector<int>& y) {
    x = Matrix(spec.input_dim, n);
    y.resize(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        const int cls = c % spec.output_dim; // exactly balanced classes
        y[static_cast<std::size_t>(c)] = cls;
        const Matrix& center = centers[static_cast<std::size_t>(cls)];
        for (int r = 0; r < spec.input_dim; ++r) {
            x.at(r, c) = center.at(r, 0) + rng.normal();
        }
    }
}

void fill_teacher_split(Rng& rng, const TaskSpec& spec, const Mlp& teacher, int n,
                        Matrix& x, Matrix& t) {
    x = Matrix(spec.input_dim, n);
    for (double& v : x.data) v = rng.normal();
    t = mlp_forward(teacher, x);
    if (spec.noise > 0.0) {
        for (double& v : t.data) v += spec.noise * rng.normal();
    }
}

} // namespace

Task make_task(const TaskSpec& spec) {
    if (spec.sizes.train < 1 || spec.sizes.val < 1 || spec.sizes.test < 1) {
        throw std::invalid_argument("make_task: split sizes must be positive");
    }
    if (spec.input_dim < 1 || spec.output_dim < 1) {
        throw std::invalid_argument("make_task: dims must be positive");
    }
    Task task;
    task.spec = spec;
    Rng rng(mix_seed(spec.seed, 0x7a5bull));

    if (spec.kind == TaskKind::BlobsClassify) {
        std::vector<Matrix> centers;
        centers.reserve(static_cast<std::size_t>(spec.output_dim));
        for (int c = 0; c < spec.output_dim; ++c) {
            Matrix center(spec.input_dim, 1);
            for (double& v : center.data) v = spec.separation * rng.normal();
            centers.push_back(std::move(center));
        }
        fill_blobs_split(rng, spec, centers, spec.sizes.train, task.train_x, task.train_y);
        fill_blobs_split(rng, spec, centers, spec.sizes.val, task.val_x, task.val_y);
        fill_blobs_split(rng, spec, centers, spec.sizes.test, task.test_x, task.test_y);
    } else {
        const Mlp teacher = make_mlp({spec.input_dim, std::max(8, spec.input_dim),
                                      spec.output_dim},
                                     Activation::Tanh, mix_seed(spec.seed, 0x7e0cull));
        fill_teacher_split(rng, spec, teacher, spec.sizes.train, task.train_x, task.train_t);
        fill_teacher_split(rng, spec, teacher, spec.sizes.val, task.val_x, task.val_t);
        fill_teacher_split(rng, spec, teacher, spec.sizes.test, task.test_x, task.test_t);
    }
    return task;
}

double task_loss(const Task& task, Split split, const Matrix& output, Matrix* d_output) {
    if (task.is_classification()) {
        return softmax_cross_entropy(output, task.labels(split), d_output);
    }
    return mean_squared_error(output, task.targets(split), d_output);
}

double task_metric(const Task& task, Split split, const Matrix& output) {
    if (task.is_classification()) {
        const auto& labels = task.labels(split);
        int correct = 0;
        for (int c = 0; c < output.cols; ++c) {
            int best = 0;
            for (int r = 1; r < output.rows; ++r) {
                if (output.at(r, c) > output.at(best, c)) best = r;
            }
            if (best == labels[static_cast<std::size_t>(c)]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(output.cols);
    }
    const double mse = mean_squared_error(output, task.targets(split), nullptr);
    return 1.0 / (1.0 + mse);
}

} // namespace mixq
