#pragma once

#include "mixq/costmodel.hpp"
#include "mixq/quantconfig.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mixq {

// One completed trial. `phase` records where the evaluation came from.
struct EvalRecord {
    QuantConfig config;
    double performance = 0.0; // P in [0, 1]
    std::int64_t memory_bytes = 0;
    std::uint64_t seed = 0;
    int iteration = 0; // 0 = init batch, then 1-based loop iterations
    std::string phase = "init";
    bool failed = false;
    MemoryBreakdown breakdown;
};

// true iff a is no worse on both objectives and strictly better on one
bool dominates(const EvalRecord& a, const EvalRecord& b);

// Non-dominated records sorted by ascending memory, strictly increasing in M
// (equal-M entries keep the max-P one, exact (M, P) ties keep the
// lexicographically smallest config). Duplicate configs are collapsed to
// their mean P before the sweep.
struct ParetoFront {
    std::vector<EvalRecord> members;
    int generation = 0;

    std::vector<QuantConfig> configs() const;
    bool same_configs(const ParetoFront& other) const;
};

ParetoFront frontier(const std::vector<EvalRecord>& records);

// argmin over the frontier of M_norm - lambda * P; ties go to smaller M, then
// lexicographically smaller config
const EvalRecord& select(const ParetoFront& front, double lambda, const MemoryBounds& bounds);

double scalarized_objective(const EvalRecord& r, double lambda, const MemoryBounds& bounds);

// true iff the last window+1 fronts are identical as config sets
bool stabilized(const std::vector<ParetoFront>& history, int window);

// CSV with columns iteration,config,P,M_bytes,M_norm,objective
std::string frontier_csv(const ParetoFront& front, double lambda, const MemoryBounds& bounds);

} // namespace mixq
