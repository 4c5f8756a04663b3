#pragma once

#include <cstddef>
#include <cstdint>

namespace mixq::kernels {

// Data-parallel inner loops. Every *_parallel kernel partitions work so that
// each output element keeps the exact accumulation order of its serial
// counterpart; results are bit-identical for any thread count. The serial
// versions are the reference implementations and stay in the build for
// testing and for the mixq_bench comparison target.

// Below this many output-elements-times-depth the dispatchers stay serial.
inline constexpr std::size_t parallel_grain = 32 * 1024;

// c (m x n) = a (m x k) * b (k x n), row-major, c overwritten.
// Per output element the k-index ascends; no other order is ever used.
void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_parallel(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);

// Blockwise absmax encoding against a non-decreasing codebook `values`.
// Per block: scale = max |x|; code = index of the nearest codebook value to
// x/scale, ties and duplicate values resolved to the lowest index. An
// all-zero block gets scale 0 and the code nearest zero.
void encode_blocks_serial(const double* x, std::size_t count, std::size_t block_size,
                          const double* values, std::size_t n_values,
                          std::uint8_t* codes, double* scales);
void encode_blocks_parallel(const double* x, std::size_t count, std::size_t block_size,
                            const double* values, std::size_t n_values,
                            std::uint8_t* codes, double* scales);
void encode_blocks(const double* x, std::size_t count, std::size_t block_size,
                   const double* values, std::size_t n_values,
                   std::uint8_t* codes, double* scales);

// out[i] = scales[i / block_size] * values[codes[i]]; exact lookup.
void decode_blocks_serial(const std::uint8_t* codes, std::size_t count,
                          std::size_t block_size, const double* values,
                          const double* scales, double* out);
void decode_blocks_parallel(const std::uint8_t* codes, std::size_t count,
                            std::size_t block_size, const double* values,
                            const double* scales, double* out);
void decode_blocks(const std::uint8_t* codes, std::size_t count,
                   std::size_t block_size, const double* values,
                   const double* scales, double* out);

// Nearest index for one normalized value; shared by the encode kernels and
// exposed so callers can pick the zero code for empty blocks.
std::size_t nearest_code(const double* values, std::size_t n_values, double y);

} // namespace mixq::kernels
