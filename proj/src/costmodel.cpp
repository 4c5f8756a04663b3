#include "mixq/costmodel.hpp"

#include <set>
#include <stdexcept>

namespace mixq {

MemoryBreakdown memory(const PrunedModel& pruned, const QuantConfig& q, int rank,
                       int block_size, const CodecKinds& kinds) {
    const int layers = pruned.model.num_layers();
    if (static_cast<int>(q.size()) != layers) {
        throw std::invalid_argument("memory: config length " + std::to_string(q.size()) +
                                    " != layer count " + std::to_string(layers));
    }
    if (block_size < 1 || rank < 0) {
        throw std::invalid_argument("memory: bad rank or block_size");
    }

    MemoryBreakdown mb;
    std::set<std::pair<int, CodebookKind>> distinct;
    for (int l = 0; l < layers; ++l) {
        const Matrix& w = pruned.model.weights[static_cast<std::size_t>(l)];
        const std::int64_t elems = static_cast<std::int64_t>(w.rows) * w.cols;
        const int bits = q.bits[static_cast<std::size_t>(l)];
        mb.base_bytes += (elems * bits + 7) / 8;
        mb.scale_bytes += ((elems + block_size - 1) / block_size) * 8;
        mb.adapter_bytes += static_cast<std::int64_t>(rank) * (w.rows + w.cols) * 8;
        distinct.insert({bits, kinds.for_bits(bits)});
    }
    for (const auto& [bits, kind] : distinct) {
        mb.codebook_bytes += (std::int64_t{1} << bits) * 8;
    }
    mb.optimizer_bytes = 2 * mb.adapter_bytes;
    mb.total = mb.base_bytes + mb.scale_bytes + mb.codebook_bytes + mb.adapter_bytes +
               mb.optimizer_bytes;
    return mb;
}

MemoryBounds memory_bounds(const PrunedModel& pruned, int rank, int block_size,
                           const CodecKinds& kinds) {
    const std::size_t layers = static_cast<std::size_t>(pruned.model.num_layers());
    MemoryBounds b;
    b.min_bytes = memory(pruned, uniform_config(layers, 4), rank, block_size, kinds).total;
    b.max_bytes = memory(pruned, uniform_config(layers, 8), rank, block_size, kinds).total;
    return b;
}

} // namespace mixq
