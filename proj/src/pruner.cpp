#include "mixq/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

namespace mixq {

int NeuronGraph::in_degree(NeuronId n) const {
    return static_cast<int>(in_neighbors[static_cast<std::size_t>(n.level)]
                                        [static_cast<std::size_t>(n.unit)].size());
}

int NeuronGraph::out_degree(NeuronId n) const {
    return static_cast<int>(out_neighbors[static_cast<std::size_t>(n.level)]
                                         [static_cast<std::size_t>(n.unit)].size());
}

std::size_t NeuronGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& level : out_neighbors) {
        for (const auto& units : level) n += units.size();
    }
    return n;
}

NeuronGraph build_neuron_graph(const Mlp& model) {
    NeuronGraph g;
    g.widths = model.widths;
    const std::size_t levels = model.widths.size();
    g.out_neighbors.resize(levels);
    g.in_neighbors.resize(levels);
    for (std::size_t v = 0; v < levels; ++v) {
        g.out_neighbors[v].resize(static_cast<std::size_t>(model.widths[v]));
        g.in_neighbors[v].resize(static_cast<std::size_t>(model.widths[v]));
    }
    for (std::size_t v = 0; v + 1 < levels; ++v) {
        for (int i = 0; i < model.widths[v]; ++i) {
            auto& out = g.out_neighbors[v][static_cast<std::size_t>(i)];
            out.resize(static_cast<std::size_t>(model.widths[v + 1]));
            std::iota(out.begin(), out.end(), 0);
        }
        for (int j = 0; j < model.widths[v + 1]; ++j) {
            auto& in = g.in_neighbors[v + 1][static_cast<std::size_t>(j)];
            in.resize(static_cast<std::size_t>(model.widths[v]));
            std::iota(in.begin(), in.end(), 0);
        }
    }
    return g;
}

namespace {

bool is_hidden(const NeuronGraph& g, NeuronId n) {
    return n.level > 0 && n.level + 1 < static_cast<int>(g.widths.size());
}

std::vector<WeightSlice> slices_for(const std::vector<NeuronId>& neurons) {
    std::set<WeightSlice> slices;
    for (NeuronId n : neurons) {
        slices.insert({n.level - 1, SliceKind::Row, n.unit});
        slices.insert({n.level - 1, SliceKind::Bias, n.unit});
        slices.insert({n.level, SliceKind::Col, n.unit});
    }
    return {slices.begin(), slices.end()};
}

} // namespace

std::vector<PruneGroup> discover_groups(const NeuronGraph& graph) {
    const int levels = static_cast<int>(graph.widths.size());
    std::vector<std::vector<bool>> assigned(static_cast<std::size_t>(levels));
    for (int v = 0; v < levels; ++v) {
        assigned[static_cast<std::size_t>(v)].assign(
            static_cast<std::size_t>(graph.widths[static_cast<std::size_t>(v)]), false);
    }
    auto taken = [&](NeuronId n) -> std::vector<bool>::reference {
        return assigned[static_cast<std::size_t>(n.level)][static_cast<std::size_t>(n.unit)];
    };

    std::vector<PruneGroup> groups;
    for (int v = 1; v + 1 < levels; ++v) {
        for (int u = 0; u < graph.widths[static_cast<std::size_t>(v)]; ++u) {
            const NeuronId seed{v, u};
            if (taken(seed)) continue;

            std::vector<NeuronId> members;
            std::vector<NeuronId> frontier{seed};
            taken(seed) = true;
            while (!frontier.empty()) {
                const NeuronId cur = frontier.back();
                frontier.pop_back();
                members.push_back(cur);
                const auto& outs = graph.out_neighbors[static_cast<std::size_t>(cur.level)]
                                                      [static_cast<std::size_t>(cur.unit)];
                for (int j : outs) {
                    const NeuronId next{cur.level + 1, j};
                    if (graph.in_degree(next) == 1 && is_hidden(graph, next) && !taken(next)) {
                        taken(next) = true;
                        frontier.push_back(next);
                    }
                }
                const auto& ins = graph.in_neighbors[static_cast<std::size_t>(cur.level)]
                                                    [static_cast<std::size_t>(cur.unit)];
                for (int i : ins) {
                    const NeuronId prev{cur.level - 1, i};
                    if (graph.out_degree(prev) == 1 && is_hidden(graph, prev) && !taken(prev)) {
                        taken(prev) = true;
                        frontier.push_back(prev);
                    }
                }
            }
            std::sort(members.begin(), members.end());
            PruneGroup g;
            g.neurons = std::move(members);
            g.slices = slices_for(g.neurons);
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

const char* to_string(ImportanceOrder o) {
    return o == ImportanceOrder::Element1 ? "element1" : "element2";
}

ImportanceOrder importance_order_from_string(const std::string& s) {
    if (s == "element1") return ImportanceOrder::Element1;
    if (s == "element2") return ImportanceOrder::Element2;
    throw std::invalid_argument("unknown importance order: " + s);
}

TaylorStats taylor_stats(const Mlp& model, const Task& task, Split split, int max_samples) {
    const Matrix& inputs = task.inputs(split);
    if (inputs.cols == 0) throw std::invalid_argument("taylor_stats: dataset is empty");
    const int n = max_samples > 0 ? std::min(max_samples, inputs.cols) : inputs.cols;

    TaylorStats stats;
    stats.samples = n;
    for (int l = 0; l < model.num_layers(); ++l) {
        const std::size_t li = static_cast<std::size_t>(l);
        stats.mean_grad.weights.emplace_back(model.weights[li].rows, model.weights[li].cols);
        stats.mean_grad.biases.emplace_back(model.biases[li].rows, 1);
        stats.sum_sq_grad.weights.emplace_back(model.weights[li].rows, model.weights[li].cols);
        stats.sum_sq_grad.biases.emplace_back(model.biases[li].rows, 1);
    }

    Matrix x(inputs.rows, 1);
    for (int s = 0; s < n; ++s) {
        for (int r = 0; r < inputs.rows; ++r) x.at(r, 0) = inputs.at(r, s);
        const ForwardCache cache = mlp_forward_cached(model, x);
        Matrix d_output;
        if (task.is_classification()) {
            const std::vector<int> label{task.labels(split)[static_cast<std::size_t>(s)]};
            softmax_cross_entropy(cache.output, label, &d_output);
        } else {
            Matrix target(cache.output.rows, 1);
            for (int r = 0; r < target.rows; ++r) {
                target.at(r, 0) = task.targets(split).at(r, s);
            }
            mean_squared_error(cache.output, target, &d_output);
        }
        const MlpGradients g = mlp_backward(model, cache, d_output);
        for (int l = 0; l < model.num_layers(); ++l) {
            const std::size_t li = static_cast<std::size_t>(l);
            for (std::size_t i = 0; i < g.weights[li].data.size(); ++i) {
                const double gv = g.weights[li].data[i];
                if (!std::isfinite(gv)) {
                    throw std::runtime_error("taylor_stats: non-finite gradient in layer " +
                                             std::to_string(l));
                }
                stats.mean_grad.weights[li].data[i] += gv;
                stats.sum_sq_grad.weights[li].data[i] += gv * gv;
            }
            for (std::size_t i = 0; i < g.biases[li].data.size(); ++i) {
                const double gv = g.biases[li].data[i];
                if (!std::isfinite(gv)) {
                    throw std::runtime_error("taylor_stats: non-finite gradient in layer " +
                                             std::to_string(l));
                }
                stats.mean_grad.biases[li].data[i] += gv;
                stats.sum_sq_grad.biases[li].data[i] += gv * gv;
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& w : stats.mean_grad.weights) scale_in_place(w, inv);
    for (auto& b : stats.mean_grad.biases) scale_in_place(b, inv);
    return stats;
}

namespace {

// visits each unique weight/bias cell of a group exactly once
template <typename Fn>
void for_each_group_cell(const PruneGroup& group, const Mlp& model, Fn&& fn) {
    std::set<std::tuple<int, int, int>> seen; // (layer, row, col); col -1 = bias
    for (const WeightSlice& s : group.slices) {
        const std::size_t li = static_cast<std::size_t>(s.layer);
        const Matrix& w = model.weights[li];
        if (s.kind == SliceKind::Row) {
            for (int c = 0; c < w.cols; ++c) {
                if (seen.insert({s.layer, s.index, c}).second) fn(s.layer, s.index, c);
            }
        } else if (s.kind == SliceKind::Col) {
            for (int r = 0; r < w.rows; ++r) {
                if (seen.insert({s.layer, r, s.index}).second) fn(s.layer, r, s.index);
            }
        } else {
            if (seen.insert({s.layer, s.index, -1}).second) fn(s.layer, s.index, -1);
        }
    }
}

} // namespace

double group_importance(const PruneGroup& group, const Mlp& model, const TaylorStats& stats,
                        ImportanceOrder order) {
    double total = 0.0;
    for_each_group_cell(group, model, [&](int layer, int r, int c) {
        const std::size_t li = static_cast<std::size_t>(layer);
        double wv, gv, sq;
        if (c < 0) {
            wv = model.biases[li].at(r, 0);
            gv = stats.mean_grad.biases[li].at(r, 0);
            sq = stats.sum_sq_grad.biases[li].at(r, 0);
        } else {
            wv = model.weights[li].at(r, c);
            gv = stats.mean_grad.weights[li].at(r, c);
            sq = stats.sum_sq_grad.weights[li].at(r, c);
        }
        if (order == ImportanceOrder::Element1) {
            total += std::fabs(gv * wv);
        } else {
            total += std::fabs(gv * wv - 0.5 * sq * wv * wv);
        }
    });
    return total;
}

double group_importance(const PruneGroup& group, const Mlp& model, const Task& task,
                        Split split, int max_samples, ImportanceOrder order) {
    return group_importance(group, model, taylor_stats(model, task, split, max_samples), order);
}

std::size_t group_parameter_count(const PruneGroup& group, const Mlp& model) {
    std::size_t n = 0;
    for_each_group_cell(group, model, [&](int, int, int) { ++n; });
    return n;
}

PrunedModel prune(const Mlp& model, std::vector<PruneGroup> groups, double rate) {
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("prune: rate must lie in [0, 1)");
    }
    std::stable_sort(groups.begin(), groups.end(), [](const PruneGroup& a, const PruneGroup& b) {
        if (a.importance != b.importance) return a.importance < b.importance;
        return a.neurons.front() < b.neurons.front();
    });

    const int levels = static_cast<int>(model.widths.size());
    std::vector<std::set<int>> removed(static_cast<std::size_t>(levels));

    // removed fraction is measured against the prunable mass: the union of
    // every group's cells (cells shared between overlapping slices count once)
    std::set<std::tuple<int, int, int>> marked;
    std::size_t prunable_total = 0;
    {
        std::set<std::tuple<int, int, int>> all_cells;
        for (const PruneGroup& g : groups) {
            for_each_group_cell(g, model, [&](int layer, int r, int c) {
                all_cells.insert({layer, r, c});
            });
        }
        prunable_total = all_cells.size();
    }

    double fraction = 0.0;
    for (const PruneGroup& g : groups) {
        if (fraction >= rate) break;
        // per-level floor: at least one surviving unit
        std::vector<int> delta(static_cast<std::size_t>(levels), 0);
        for (NeuronId n : g.neurons) ++delta[static_cast<std::size_t>(n.level)];
        bool blocked = false;
        for (int v = 0; v < levels; ++v) {
            const std::size_t vi = static_cast<std::size_t>(v);
            if (delta[vi] > 0 &&
                model.widths[vi] - static_cast<int>(removed[vi].size()) - delta[vi] < 1) {
                blocked = true;
                break;
            }
        }
        if (blocked) continue;
        for (NeuronId n : g.neurons) {
            removed[static_cast<std::size_t>(n.level)].insert(n.unit);
        }
        for_each_group_cell(g, model, [&](int layer, int r, int c) {
            marked.insert({layer, r, c});
        });
        fraction = prunable_total == 0
                       ? 0.0
                       : static_cast<double>(marked.size()) / static_cast<double>(prunable_total);
    }

    PrunedModel pruned;
    pruned.original_widths = model.widths;
    pruned.rate_requested = rate;
    pruned.removed_fraction = fraction;
    pruned.rate_reached = fraction >= rate;
    pruned.retained.resize(static_cast<std::size_t>(levels));
    for (int v = 0; v < levels; ++v) {
        const std::size_t vi = static_cast<std::size_t>(v);
        for (int u = 0; u < model.widths[vi]; ++u) {
            if (!removed[vi].count(u)) pruned.retained[vi].push_back(u);
        }
    }

    Mlp& out = pruned.model;
    out.activation = model.activation;
    for (int v = 0; v < levels; ++v) {
        out.widths.push_back(static_cast<int>(pruned.retained[static_cast<std::size_t>(v)].size()));
    }
    for (int l = 0; l + 1 < levels; ++l) {
        const auto& rows = pruned.retained[static_cast<std::size_t>(l + 1)];
        const auto& cols = pruned.retained[static_cast<std::size_t>(l)];
        Matrix w(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
        Matrix b(static_cast<int>(rows.size()), 1);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < cols.size(); ++c) {
                w.at(static_cast<int>(r), static_cast<int>(c)) =
                    model.weights[static_cast<std::size_t>(l)].at(rows[r], cols[c]);
            }
            b.at(static_cast<int>(r), 0) =
                model.biases[static_cast<std::size_t>(l)].at(rows[r], 0);
        }
        out.weights.push_back(std::move(w));
        out.biases.push_back(std::move(b));
    }
    return pruned;
}

Mlp masked_model(const Mlp& model, const PrunedModel& pruned) {
    Mlp masked = model;
    const int levels = static_cast<int>(model.widths.size());
    for (int v = 0; v < levels; ++v) {
        const std::size_t vi = static_cast<std::size_t>(v);
        std::vector<bool> keep(static_cast<std::size_t>(model.widths[vi]), false);
        for (int u : pruned.retained[vi]) keep[static_cast<std::size_t>(u)] = true;
        for (int u = 0; u < model.widths[vi]; ++u) {
            if (keep[static_cast<std::size_t>(u)]) continue;
            if (v > 0) {
                Matrix& w = masked.weights[static_cast<std::size_t>(v - 1)];
                for (int c = 0; c < w.cols; ++c) w.at(u, c) = 0.0;
                masked.biases[static_cast<std::size_t>(v - 1)].at(u, 0) = 0.0;
            }
            if (v + 1 < levels) {
                Matrix& w = masked.weights[static_cast<std::size_t>(v)];
                for (int r = 0; r < w.rows; ++r) w.at(r, u) = 0.0;
            }
        }
    }
    return masked;
}

} // namespace mixq
