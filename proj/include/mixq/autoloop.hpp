#pragma once

#include "mixq/pareto.hpp"
#include "mixq/pruner.hpp"
#include "mixq/surrogate.hpp"
#include "mixq/task.hpp"
#include "mixq/workbench.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mixq {

struct SearchPlan {
    int init_count = 10;
    int max_iters = 40;
    double lambda = 1.0;
    int rank = 4;
    AdapterInit adapter_init = AdapterInit::Loftq;
    int loftq_iterations = 1;
    int block_size = 64;
    CodecKinds kinds;
    int stabilize_window = 5;
    std::uint64_t master_seed = 0;
    TrainHyper train;
    GpParams gp;
    int workers = 0; // parallel evaluations; 0 = all cores, capped by MIXQ_WORKERS
};

struct IterationAudit {
    int iteration = 0;
    QuantConfig suggested;
    double expected_improvement = 0.0;
    double predicted_objective = 0.0;
    double gp_lengthscale = 0.0;
    double gp_noise_var = 0.0;
    double gp_signal_var = 0.0;
};

struct SearchResult {
    std::vector<EvalRecord> records;
    ParetoFront front;
    EvalRecord best; // q* = select(front, lambda)
    std::vector<IterationAudit> audits;
    std::string stop_reason; // init-only | budget | stabilized | exhausted
    MemoryBounds bounds;
    int iterations_completed = 0;
};

// Records from a previous identical run, keyed by config; matching configs
// are replayed instead of retrained.
using ReplayMap = std::map<QuantConfig, EvalRecord>;

// The per-trial seed: derived from (master seed, config) so that brute_force
// and run_search agree on every shared configuration.
std::uint64_t trial_seed(std::uint64_t master_seed, const QuantConfig& q);

// One assemble + train + evaluate; divergence yields P = 0 with failed set.
EvalRecord evaluate_config(const PrunedModel& pruned, const Task& task, const SearchPlan& plan,
                           const QuantConfig& q, int iteration, const std::string& phase);

// Candidate configurations for one suggestion step: the full {4,8}^L space
// when L <= 16, otherwise 4096 seeded uniform samples plus the 1-bit-flip
// neighborhood of the current frontier.
std::vector<QuantConfig> candidate_space(std::size_t layers, std::uint64_t seed,
                                         const ParetoFront& front);

// Fig-1 style loop: evaluate a seeded init batch, then iterate fit ->
// suggest -> evaluate -> refit until the frontier stabilizes, the space is
// exhausted, or the budget runs out. Wall times go to `progress` (when
// given); nothing nondeterministic reaches the result.
SearchResult run_search(const PrunedModel& pruned, const Task& task, const SearchPlan& plan,
                        const ReplayMap* replay = nullptr, std::ostream* progress = nullptr);

// Evaluates every config in {4,8}^L (guard: 2^L <= 4096); the acceptance
// oracle the search is judged against.
SearchResult brute_force(const PrunedModel& pruned, const Task& task, const SearchPlan& plan,
                         std::ostream* progress = nullptr);

} // namespace mixq
