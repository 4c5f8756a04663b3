#pragma once

#include "mixq/pareto.hpp"
#include "mixq/quantconfig.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mixq {

struct GpParams {
    double lengthscale = 2.0;
    double signal_var = 1.0;  // sigma_f^2
    double noise_var = 1e-6;  // sigma_n^2 (sigma_n = 1e-3)
    bool grid_refit = true;   // maximize log marginal likelihood over the grid below
};

// RBF kernel on the {0,1}^L encoding; targets standardized to zero mean and
// unit variance over the observations. Immutable after fit.
class GpState {
public:
    static GpState fit(const std::vector<EvalRecord>& records, const GpParams& params = {});

    struct Prediction {
        double mean = 0.0;
        double stddev = 0.0; // de-standardized, >= 0
    };
    Prediction predict(const QuantConfig& q) const;

    // mean absolute error of posterior means over held-out records; a
    // reporting metric, never the fitting objective
    double mean_absolute_error(const std::vector<EvalRecord>& holdout) const;

    const GpParams& params() const { return params_; }
    double log_marginal_likelihood() const { return lml_; }
    std::size_t observation_count() const { return inputs_.size(); }

private:
    GpParams params_;
    std::vector<std::vector<double>> inputs_;
    std::vector<double> targets_std_;
    std::vector<double> alpha_;        // (K + sn^2 I)^-1 y
    std::vector<double> chol_;         // lower Cholesky factor, row-major n x n
    double target_mean_ = 0.0;
    double target_scale_ = 1.0;
    double lml_ = 0.0;
    std::size_t n_ = 0;
};

struct Suggestion {
    QuantConfig config;
    double expected_improvement = 0.0;
    double predicted_objective = 0.0;
};

// Expected Improvement of the scalarized objective J(q) = M_norm(q) -
// lambda * P_hat(q) against the best realized J among `evaluated`. Ties go to
// the smaller predicted objective, then the lexicographically smallest
// config. Throws when every candidate has already been evaluated.
Suggestion suggest(const GpState& state, const std::vector<QuantConfig>& candidates,
                   const std::vector<EvalRecord>& evaluated, double lambda,
                   const std::function<std::int64_t(const QuantConfig&)>& memory_of,
                   const MemoryBounds& bounds);

struct SearchSpaceExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mixq
