#pragma once

#include "mixq/model.hpp"
#include "mixq/task.hpp"

#include <string>
#include <vector>

namespace mixq {

struct NeuronId {
    int level = 0; // 0 = input, widths.size()-1 = output
    int unit = 0;

    friend bool operator==(const NeuronId&, const NeuronId&) = default;
    friend auto operator<=>(const NeuronId&, const NeuronId&) = default;
};

// Directed wiring of a feed-forward model: one edge per structural weight.
// Dense for an MLP, but the trigger rule below only relies on degrees, so
// arbitrary feed-forward wirings work.
struct NeuronGraph {
    std::vector<int> widths;
    std::vector<std::vector<std::vector<int>>> out_neighbors; // [level][unit] -> units of level+1
    std::vector<std::vector<std::vector<int>>> in_neighbors;  // [level][unit] -> units of level-1

    int in_degree(NeuronId n) const;
    int out_degree(NeuronId n) const;
    std::size_t edge_count() const;
};

NeuronGraph build_neuron_graph(const Mlp& model);

enum class SliceKind : std::uint8_t { Row = 0, Col = 1, Bias = 2 };

// (layer, row-or-column, index) of weights removed together with a group
struct WeightSlice {
    int layer = 0;
    SliceKind kind = SliceKind::Row;
    int index = 0;

    friend bool operator==(const WeightSlice&, const WeightSlice&) = default;
    friend auto operator<=>(const WeightSlice&, const WeightSlice&) = default;
};

struct PruneGroup {
    std::vector<NeuronId> neurons;    // sorted
    std::vector<WeightSlice> slices;  // weights incident to the group's neurons
    double importance = 0.0;
};

// Trigger-propagation closure: starting from each unassigned hidden unit,
// pull in N_j whenever N_j is a consumer with in-degree 1, and N_i whenever
// the group holds N_i's sole consumer. Groups partition the hidden units;
// input and output levels are never pruned.
std::vector<PruneGroup> discover_groups(const NeuronGraph& graph);

enum class ImportanceOrder : std::uint8_t { Element1 = 0, Element2 = 1 };

const char* to_string(ImportanceOrder o);
ImportanceOrder importance_order_from_string(const std::string& s);

// Per-weight Taylor terms accumulated over a dataset: the mean-loss gradient
// and the sum over samples of squared per-sample gradients.
struct TaylorStats {
    MlpGradients mean_grad;
    MlpGradients sum_sq_grad;
    int samples = 0;
};

TaylorStats taylor_stats(const Mlp& model, const Task& task, Split split, int max_samples);

// Element1: sum over the group's weights of |g_k * W_k|.
// Element2: sum of |g_k * W_k - 1/2 * sum_j (g_jk * W_k)^2|.
double group_importance(const PruneGroup& group, const Mlp& model, const TaylorStats& stats,
                        ImportanceOrder order);
double group_importance(const PruneGroup& group, const Mlp& model, const Task& task,
                        Split split, int max_samples, ImportanceOrder order);

// unique weight/bias cells covered by the group's slices (overlapping row and
// column slices inside one group count once)
std::size_t group_parameter_count(const PruneGroup& group, const Mlp& model);

struct PrunedModel {
    Mlp model;                              // compacted dense model
    std::vector<int> original_widths;
    std::vector<std::vector<int>> retained; // per level, ascending original indices
    double rate_requested = 0.0;
    double removed_fraction = 0.0;
    bool rate_reached = true;

    int adapter_layer_count() const { return model.num_layers(); }
};

// Removes lowest-importance groups (ranked globally inside) until the removed
// parameter fraction reaches `rate`; a group is skipped when removing it
// would leave any hidden level empty. rate unreachable -> best effort with
// rate_reached = false.
PrunedModel prune(const Mlp& model, std::vector<PruneGroup> groups, double rate);

// Original model with every removed unit's incident weights zeroed; the
// compacted forward must match this one's forward on every input.
Mlp masked_model(const Mlp& model, const PrunedModel& pruned);

} // namespace mixq
