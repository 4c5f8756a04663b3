#include "mixq/pruner.hpp"

#include "mixq/workbench.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace mixq;

namespace {

Task small_blobs_task(std::uint64_t seed, int dim, int classes) {
    TaskSpec spec;
    spec.kind = TaskKind::BlobsClassify;
    spec.seed = seed;
    spec.sizes = {96, 48, 48};
    spec.input_dim = dim;
    spec.output_dim = classes;
    return make_task(spec);
}

} // namespace

TEST_CASE("neuron graph of a dense MLP") {
    const Mlp m = make_mlp({4, 8, 4}, Activation::ReLU, 31);
    const NeuronGraph g = build_neuron_graph(m);
    CHECK(g.edge_count() == 4 * 8 + 8 * 4);
    CHECK(g.in_degree({1, 0}) == 4);
    CHECK(g.in_degree({2, 3}) == 8);
    CHECK(g.out_degree({0, 0}) == 8);
    CHECK(g.out_degree({2, 0}) == 0);
}

TEST_CASE("discover_groups on a 4-8-4 MLP: 8 singleton groups of 9 cells each") {
    const Mlp m = make_mlp({4, 8, 4}, Activation::ReLU, 32);
    const auto groups = discover_groups(build_neuron_graph(m));
    REQUIRE(groups.size() == 8);
    for (int h = 0; h < 8; ++h) {
        const PruneGroup& g = groups[static_cast<std::size_t>(h)];
        REQUIRE(g.neurons.size() == 1);
        CHECK(g.neurons[0] == NeuronId{1, h});
        // row h of W_0, bias_0[h], column h of W_1
        REQUIRE(g.slices.size() == 3);
        CHECK(std::count(g.slices.begin(), g.slices.end(),
                         WeightSlice{0, SliceKind::Row, h}) == 1);
        CHECK(std::count(g.slices.begin(), g.slices.end(),
                         WeightSlice{0, SliceKind::Bias, h}) == 1);
        CHECK(std::count(g.slices.begin(), g.slices.end(),
                         WeightSlice{1, SliceKind::Col, h}) == 1);
        CHECK(group_parameter_count(g, m) == 4 + 1 + 4);
    }
}

TEST_CASE("trigger rule cascades across width-1 levels") {
    // 1-1-1-1: the two hidden units each have in-degree 1 and a sole
    // consumer, so they collapse into one group
    const Mlp chain = make_mlp({1, 1, 1, 1}, Activation::ReLU, 33);
    const auto groups = discover_groups(build_neuron_graph(chain));
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].neurons.size() == 2);
    CHECK(groups[0].neurons[0] == NeuronId{1, 0});
    CHECK(groups[0].neurons[1] == NeuronId{2, 0});
}

TEST_CASE("in-degree above one blocks the forward trigger") {
    // 2-2-2: every hidden unit has in-degree 2, so groups stay singleton
    const Mlp m = make_mlp({2, 2, 2}, Activation::ReLU, 34);
    const auto groups = discover_groups(build_neuron_graph(m));
    CHECK(groups.size() == 2);
    for (const auto& g : groups) CHECK(g.neurons.size() == 1);
}

TEST_CASE("groups partition the prunable hidden units") {
    const Mlp m = make_mlp({6, 9, 7, 5}, Activation::Tanh, 35);
    const auto groups = discover_groups(build_neuron_graph(m));
    std::set<NeuronId> seen;
    std::size_t total = 0;
    for (const auto& g : groups) {
        for (NeuronId n : g.neurons) {
            CHECK(n.level >= 1);
            CHECK(n.level <= 2);
            CHECK(seen.insert(n).second); // disjoint
            ++total;
        }
    }
    CHECK(total == 9 + 7);
}

TEST_CASE("importance of an all-zero group is zero for both orders") {
    Mlp m = make_mlp({3, 4, 3}, Activation::ReLU, 36);
    // zero out unit 1's incident weights
    for (int c = 0; c < 3; ++c) m.weights[0].at(1, c) = 0.0;
    m.biases[0].at(1, 0) = 0.0;
    for (int r = 0; r < 3; ++r) m.weights[1].at(r, 1) = 0.0;

    const Task task = small_blobs_task(5, 3, 3);
    const auto groups = discover_groups(build_neuron_graph(m));
    const TaylorStats stats = taylor_stats(m, task, Split::Train, 32);
    CHECK(group_importance(groups[1], m, stats, ImportanceOrder::Element1) == 0.0);
    CHECK(group_importance(groups[1], m, stats, ImportanceOrder::Element2) == 0.0);
}

TEST_CASE("single-weight model: Element1 equals the hand derivative") {
    TaskSpec spec;
    spec.kind = TaskKind::TeacherRegress;
    spec.seed = 77;
    spec.sizes = {4, 1, 1};
    spec.input_dim = 1;
    spec.output_dim = 1;
    spec.noise = 0.0;
    const Task task = make_task(spec);

    Mlp m = make_mlp({1, 1}, Activation::ReLU, 37);
    const double w = 0.75;
    m.weights[0].at(0, 0) = w;
    m.biases[0].at(0, 0) = 0.0;

    const double x = task.train_x.at(0, 0);
    const double t = task.train_t.at(0, 0);
    const double hand_grad = 2.0 * (w * x - t) * x; // d/dw of (wx - t)^2

    const TaylorStats stats = taylor_stats(m, task, Split::Train, 1);
    CHECK(stats.mean_grad.weights[0].at(0, 0) == doctest::Approx(hand_grad).epsilon(1e-12));

    PruneGroup weight_only;
    weight_only.slices = {WeightSlice{0, SliceKind::Row, 0}};
    const double e1 = group_importance(weight_only, m, stats, ImportanceOrder::Element1);
    CHECK(e1 == doctest::Approx(std::fabs(hand_grad * w)).epsilon(1e-12));

    const double e2 = group_importance(weight_only, m, stats, ImportanceOrder::Element2);
    const double expected_e2 = std::fabs(hand_grad * w - 0.5 * (hand_grad * w) * (hand_grad * w));
    CHECK(e2 == doctest::Approx(expected_e2).epsilon(1e-12));
}

TEST_CASE("importance is non-negative for both estimators") {
    const Mlp m = make_mlp({4, 8, 4}, Activation::Tanh, 38);
    const Task task = small_blobs_task(6, 4, 4);
    const TaylorStats stats = taylor_stats(m, task, Split::Train, 48);
    for (const auto& g : discover_groups(build_neuron_graph(m))) {
        CHECK(group_importance(g, m, stats, ImportanceOrder::Element1) >= 0.0);
        CHECK(group_importance(g, m, stats, ImportanceOrder::Element2) >= 0.0);
    }
}

TEST_CASE("Element1 ranking agrees with the zero-out oracle at the extremes") {
    const Task task = small_blobs_task(7, 4, 4);
    Mlp m = make_mlp({4, 8, 4}, Activation::Tanh, 39);
    TrainHyper hyper;
    hyper.epochs = 20;
    hyper.batch = 16;
    hyper.seed = 7;
    train_dense(m, task, hyper);

    auto groups = discover_groups(build_neuron_graph(m));
    const TaylorStats stats = taylor_stats(m, task, Split::Train, 96);
    for (auto& g : groups) {
        g.importance = group_importance(g, m, stats, ImportanceOrder::Element1);
    }

    // oracle: actual |delta loss| when the group's cells are zeroed
    const auto base_output = mlp_forward(m, task.train_x);
    const double base_loss = task_loss(task, Split::Train, base_output, nullptr);
    std::vector<double> actual;
    for (const auto& g : groups) {
        Mlp zeroed = m;
        for (const WeightSlice& s : g.slices) {
            const std::size_t li = static_cast<std::size_t>(s.layer);
            if (s.kind == SliceKind::Row) {
                for (int c = 0; c < zeroed.weights[li].cols; ++c) {
                    zeroed.weights[li].at(s.index, c) = 0.0;
                }
            } else if (s.kind == SliceKind::Col) {
                for (int r = 0; r < zeroed.weights[li].rows; ++r) {
                    zeroed.weights[li].at(r, s.index) = 0.0;
                }
            } else {
                zeroed.biases[li].at(s.index, 0) = 0.0;
            }
        }
        const double loss = task_loss(task, Split::Train,
                                      mlp_forward(zeroed, task.train_x), nullptr);
        actual.push_back(std::fabs(loss - base_loss));
    }

    const auto argmax = [](const std::vector<double>& v) {
        return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
    };
    const auto argmin = [](const std::vector<double>& v) {
        return std::distance(v.begin(), std::min_element(v.begin(), v.end()));
    };
    std::vector<double> estimated;
    for (const auto& g : groups) estimated.push_back(g.importance);
    CHECK(argmax(estimated) == argmax(actual));
    CHECK(argmin(estimated) == argmin(actual));
}

TEST_CASE("prune") {
    const Mlp m = make_mlp({4, 8, 4}, Activation::ReLU, 40);
    auto groups = discover_groups(build_neuron_graph(m));
    for (std::size_t i = 0; i < groups.size(); ++i) {
        groups[i].importance = static_cast<double>(i); // ascending by unit id
    }

    SUBCASE("rate 0 keeps the model intact") {
        const PrunedModel p = prune(m, groups, 0.0);
        CHECK(p.model.widths == m.widths);
        CHECK(p.removed_fraction == 0.0);
        CHECK(p.rate_reached);
        for (int l = 0; l < m.num_layers(); ++l) {
            CHECK(bitwise_equal(p.model.weights[static_cast<std::size_t>(l)],
                                m.weights[static_cast<std::size_t>(l)]));
        }
    }
    SUBCASE("rate 0.5 on 8 equal-size groups removes exactly the 4 least important") {
        const PrunedModel p = prune(m, groups, 0.5);
        CHECK(p.model.widths == std::vector<int>{4, 4, 4});
        CHECK(p.removed_fraction == 0.5);
        CHECK(p.rate_reached);
        // units 0..3 had the lowest importance
        CHECK(p.retained[1] == std::vector<int>{4, 5, 6, 7});
    }
    SUBCASE("per-layer floor blocks full removal and flags best effort") {
        const PrunedModel p = prune(m, groups, 0.99);
        CHECK_FALSE(p.rate_reached);
        CHECK(p.model.widths[1] == 1); // floor kept one unit
        CHECK(p.removed_fraction < 0.99);
    }
    SUBCASE("parameter count strictly decreases with each removed group") {
        std::size_t prev = m.parameter_count();
        for (double rate : {0.1, 0.3, 0.6}) {
            const PrunedModel p = prune(m, groups, rate);
            const std::size_t count = p.model.parameter_count();
            CHECK(count < prev);
            prev = count;
        }
    }
    SUBCASE("invalid rate throws") {
        CHECK_THROWS(prune(m, groups, 1.0));
        CHECK_THROWS(prune(m, groups, -0.1));
    }
}

TEST_CASE("masked-forward identity across rates and seeds") {
    for (std::uint64_t seed : {101ull, 202ull}) {
        const Mlp m = make_mlp({16, 32, 32, 32, 16}, Activation::ReLU, seed);
        auto groups = discover_groups(build_neuron_graph(m));
        const Task task = small_blobs_task(seed, 16, 16);
        const TaylorStats stats = taylor_stats(m, task, Split::Train, 48);
        for (auto& g : groups) {
            g.importance = group_importance(g, m, stats, ImportanceOrder::Element1);
        }
        for (double rate : {0.2, 0.3, 0.5}) {
            const PrunedModel p = prune(m, groups, rate);
            REQUIRE(p.rate_reached);
            const Mlp masked = masked_model(m, p);
            Rng rng(seed + static_cast<std::uint64_t>(rate * 100));
            Matrix x(16, 100);
            for (double& v : x.data) v = rng.uniform(-3.0, 3.0);
            const Matrix a = mlp_forward(p.model, x);
            const Matrix b = mlp_forward(masked, x);
            CHECK(max_abs_diff(a, b) <= 1e-12);
        }
    }
}
