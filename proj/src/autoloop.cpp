#include "mixq/autoloop.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mixq {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

int effective_workers(const SearchPlan& plan) {
#ifdef _OPENMP
    int workers = plan.workers > 0 ? plan.workers : omp_get_max_threads();
#else
    int workers = 1;
#endif
    return std::max(1, workers);
}

// evaluates configs[i] into records[i]; order of the output is fixed no
// matter how many workers run
void evaluate_batch(const PrunedModel& pruned, const Task& task, const SearchPlan& plan,
                    const std::vector<QuantConfig>& configs, int iteration,
                    const std::string& phase, const ReplayMap* replay,
                    std::vector<EvalRecord>& out) {
    const std::size_t base = out.size();
    out.resize(base + configs.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (replay) {
            auto it = replay->find(configs[i]);
            if (it != replay->end()) {
                out[base + i] = it->second;
                out[base + i].iteration = iteration;
                out[base + i].phase = phase;
                continue;
            }
        }
        todo.push_back(i);
    }
    const int workers = effective_workers(plan);
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1 && todo.size() > 1)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(todo.size()); ++t) {
        const std::size_t i = todo[static_cast<std::size_t>(t)];
        out[base + i] = evaluate_config(pruned, task, plan, configs[i], iteration, phase);
    }
}

} // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, const QuantConfig& q) {
    return mix_seed(master_seed, hash_bytes(q.to_digits()));
}

EvalRecord evaluate_config(const PrunedModel& pruned, const Task& task, const SearchPlan& plan,
                           const QuantConfig& q, int iteration, const std::string& phase) {
    EvalRecord rec;
    rec.config = q;
    rec.seed = trial_seed(plan.master_seed, q);
    rec.iteration = iteration;
    rec.phase = phase;
    rec.breakdown = memory(pruned, q, plan.rank, plan.block_size, plan.kinds);
    rec.memory_bytes = rec.breakdown.total;

    AssembleOptions opts;
    opts.rank = plan.rank;
    opts.init = plan.adapter_init;
    opts.loftq_iterations = plan.loftq_iterations;
    opts.block_size = plan.block_size;
    opts.kinds = plan.kinds;
    opts.seed = rec.seed;

    TrainHyper hyper = plan.train;
    hyper.seed = rec.seed;
    try {
        AssembledModel model = assemble(pruned, q, opts);
        const TrainReport report = train_adapters(model, task, hyper);
        rec.performance = report.metric;
    } catch (const TrainingDiverged&) {
        rec.performance = 0.0;
        rec.failed = true;
    }
    return rec;
}

std::vector<QuantConfig> candidate_space(std::size_t layers, std::uint64_t seed,
                                         const ParetoFront& front) {
    if (layers <= 16) return enumerate_configs(layers);

    std::set<QuantConfig> out;
    Rng rng(mix_seed(seed, 0xca0dull));
    while (out.size() < 4096) {
        QuantConfig q;
        q.bits.resize(layers);
        for (std::size_t i = 0; i < layers; ++i) q.bits[i] = rng.uniform_int(0, 1) ? 8 : 4;
        out.insert(std::move(q));
    }
    for (const auto& member : front.members) {
        for (std::size_t i = 0; i < layers; ++i) {
            QuantConfig flip = member.config;
            flip.bits[i] = flip.bits[i] == 4 ? 8 : 4;
            out.insert(std::move(flip));
        }
    }
    return {out.begin(), out.end()};
}

SearchResult run_search(const PrunedModel& pruned, const Task& task, const SearchPlan& plan,
                        const ReplayMap* replay, std::ostream* progress) {
    if (plan.init_count < 1) throw std::invalid_argument("run_search: init_count must be >= 1");
    if (plan.max_iters < 0) throw std::invalid_argument("run_search: max_iters must be >= 0");
    const std::size_t layers = static_cast<std::size_t>(pruned.adapter_layer_count());

    SearchResult result;
    result.bounds = memory_bounds(pruned, plan.rank, plan.block_size, plan.kinds);
    const auto memory_of = [&](const QuantConfig& q) {
        return memory(pruned, q, plan.rank, plan.block_size, plan.kinds).total;
    };

    // init batch: uniform without replacement
    std::vector<QuantConfig> init_configs;
    Rng init_rng(mix_seed(plan.master_seed, 0x1417ull));
    if (layers <= 16) {
        std::vector<QuantConfig> space = enumerate_configs(layers);
        init_rng.shuffle(space);
        const std::size_t take = std::min<std::size_t>(space.size(),
                                                       static_cast<std::size_t>(plan.init_count));
        init_configs.assign(space.begin(), space.begin() + static_cast<std::ptrdiff_t>(take));
    } else {
        std::set<QuantConfig> chosen;
        while (chosen.size() < static_cast<std::size_t>(plan.init_count)) {
            QuantConfig q;
            q.bits.resize(layers);
            for (std::size_t i = 0; i < layers; ++i) {
                q.bits[i] = init_rng.uniform_int(0, 1) ? 8 : 4;
            }
            if (chosen.insert(q).second) init_configs.push_back(std::move(q));
        }
    }

    auto t0 = std::chrono::steady_clock::now();
    evaluate_batch(pruned, task, plan, init_configs, 0, "init", replay, result.records);
    if (progress) {
        *progress << "[init] evaluated " << init_configs.size() << " configs in "
                  << elapsed_ms(t0) << " ms\n";
    }

    std::vector<ParetoFront> history;
    history.push_back(frontier(result.records));
    result.stop_reason = plan.max_iters == 0 ? "init-only" : "budget";

    for (int iter = 1; iter <= plan.max_iters; ++iter) {
        t0 = std::chrono::steady_clock::now();
        const GpState gp = GpState::fit(result.records, plan.gp);
        const std::vector<QuantConfig> candidates =
            candidate_space(layers, mix_seed(plan.master_seed, static_cast<std::uint64_t>(iter)),
                            history.back());
        Suggestion s;
        try {
            s = suggest(gp, candidates, result.records, plan.lambda, memory_of, result.bounds);
        } catch (const SearchSpaceExhausted&) {
            result.stop_reason = "exhausted";
            break;
        }
        const double suggest_ms = elapsed_ms(t0);

        IterationAudit audit;
        audit.iteration = iter;
        audit.suggested = s.config;
        audit.expected_improvement = s.expected_improvement;
        audit.predicted_objective = s.predicted_objective;
        audit.gp_lengthscale = gp.params().lengthscale;
        audit.gp_noise_var = gp.params().noise_var;
        audit.gp_signal_var = gp.params().signal_var;
        result.audits.push_back(audit);

        t0 = std::chrono::steady_clock::now();
        evaluate_batch(pruned, task, plan, {s.config}, iter, "loop", replay, result.records);
        result.iterations_completed = iter;
        if (progress) {
            *progress << "[iter " << iter << "] config " << s.config.to_digits() << " EI "
                      << s.expected_improvement << " suggest " << suggest_ms << " ms, eval "
                      << elapsed_ms(t0) << " ms, P " << result.records.back().performance
                      << "\n";
        }

        ParetoFront front = frontier(result.records);
        front.generation = iter;
        history.push_back(std::move(front));
        if (stabilized(history, plan.stabilize_window)) {
            result.stop_reason = "stabilized";
            break;
        }
    }

    result.front = history.back();
    result.best = select(result.front, plan.lambda, result.bounds);
    return result;
}

SearchResult brute_force(const PrunedModel& pruned, const Task& task, const SearchPlan& plan,
                         std::ostream* progress) {
    const std::size_t layers = static_cast<std::size_t>(pruned.adapter_layer_count());
    if (layers > 12) {
        throw std::invalid_argument("brute_force: 2^L exceeds the 4096-config guard");
    }

    SearchResult result;
    result.bounds = memory_bounds(pruned, plan.rank, plan.block_size, plan.kinds);
    const std::vector<QuantConfig> space = enumerate_configs(layers);
    const auto t0 = std::chrono::steady_clock::now();
    evaluate_batch(pruned, task, plan, space, 0, "brute", nullptr, result.records);
    if (progress) {
        *progress << "[brute] evaluated " << space.size() << " configs in " << elapsed_ms(t0)
                  << " ms\n";
    }
    result.front = frontier(result.records);
    result.best = select(result.front, plan.lambda, result.bounds);
    result.stop_reason = "exhausted";
    return result;
}

} // namespace mixq
