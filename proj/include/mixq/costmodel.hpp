#pragma once

#include "mixq/pruner.hpp"
#include "mixq/quantconfig.hpp"
#include "mixq/quantizer.hpp"

#include <cstdint>

namespace mixq {

// Analytic byte inventory standing in for measured GPU peak memory. Integer
// exact; no float rounding anywhere.
struct MemoryBreakdown {
    std::int64_t base_bytes = 0;      // sum_i ceil(elems_i * q_i / 8)
    std::int64_t scale_bytes = 0;     // sum_i ceil(elems_i / block_size) * 8
    std::int64_t codebook_bytes = 0;  // per distinct (bits, kind): 2^bits * 8
    std::int64_t adapter_bytes = 0;   // sum_i rank * (d_out_i + d_in_i) * 8
    std::int64_t optimizer_bytes = 0; // 2 * adapter_bytes (Adam m, v)
    std::int64_t total = 0;
};

struct CodecKinds {
    CodebookKind kind_4bit = CodebookKind::NormalFloat;
    CodebookKind kind_8bit = CodebookKind::Uniform;

    CodebookKind for_bits(int bits) const { return bits == 4 ? kind_4bit : kind_8bit; }
};

MemoryBreakdown memory(const PrunedModel& pruned, const QuantConfig& q, int rank,
                       int block_size, const CodecKinds& kinds = {});

// [M(all-4), M(all-8)]; the normalization range used by the scalarized
// objective M_norm - lambda * P
struct MemoryBounds {
    std::int64_t min_bytes = 0;
    std::int64_t max_bytes = 0;

    double normalize(std::int64_t m) const {
        if (max_bytes == min_bytes) return 0.0;
        return static_cast<double>(m - min_bytes) / static_cast<double>(max_bytes - min_bytes);
    }
};

MemoryBounds memory_bounds(const PrunedModel& pruned, int rank, int block_size,
                           const CodecKinds& kinds = {});

} // namespace mixq
