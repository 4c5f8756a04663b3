#include "mixq/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace mixq::kernels {

void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    std::fill(c, c + m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = a[i * k + kk];
            const double* brow = b + kk * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void matmul_parallel(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        double* crow = c + static_cast<std::size_t>(i) * n;
        std::fill(crow, crow + n, 0.0);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = a[static_cast<std::size_t>(i) * k + kk];
            const double* brow = b + kk * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    if (m * n * k >= parallel_grain && m > 1) {
        matmul_parallel(a, b, c, m, k, n);
    } else {
        matmul_serial(a, b, c, m, k, n);
    }
}

std::size_t nearest_code(const double* values, std::size_t n_values, double y) {
    const double* end = values + n_values;
    const double* right = std::lower_bound(values, end, y);
    std::size_t idx;
    if (right == values) {
        idx = 0;
    } else if (right == end) {
        idx = n_values - 1;
    } else {
        const double* left = right - 1;
        const double dl = y - *left;
        const double dr = *right - y;
        idx = (dl <= dr) ? static_cast<std::size_t>(left - values)
                         : static_cast<std::size_t>(right - values);
    }
    // duplicate codebook values resolve to the lowest index
    while (idx > 0 && values[idx - 1] == values[idx]) --idx;
    return idx;
}

namespace {

inline void encode_one_block(const double* x, std::size_t begin, std::size_t end,
                             const double* values, std::size_t n_values,
                             std::uint8_t* codes, double* scale_out) {
    double scale = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double a = std::fabs(x[i]);
        if (a > scale) scale = a;
    }
    if (scale == 0.0) {
        const std::uint8_t zero_code =
            static_cast<std::uint8_t>(nearest_code(values, n_values, 0.0));
        for (std::size_t i = begin; i < end; ++i) codes[i] = zero_code;
        *scale_out = 0.0;
        return;
    }
    for (std::size_t i = begin; i < end; ++i) {
        codes[i] = static_cast<std::uint8_t>(nearest_code(values, n_values, x[i] / scale));
    }
    *scale_out = scale;
}

} // namespace

void encode_blocks_serial(const double* x, std::size_t count, std::size_t block_size,
                          const double* values, std::size_t n_values,
                          std::uint8_t* codes, double* scales) {
    const std::size_t n_blocks = (count + block_size - 1) / block_size;
    for (std::size_t blk = 0; blk < n_blocks; ++blk) {
        const std::size_t begin = blk * block_size;
        const std::size_t end = std::min(begin + block_size, count);
        encode_one_block(x, begin, end, values, n_values, codes, scales + blk);
    }
}

void encode_blocks_parallel(const double* x, std::size_t count, std::size_t block_size,
                            const double* values, std::size_t n_values,
                            std::uint8_t* codes, double* scales) {
    const std::size_t n_blocks = (count + block_size - 1) / block_size;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(n_blocks); ++blk) {
        const std::size_t begin = static_cast<std::size_t>(blk) * block_size;
        const std::size_t end = std::min(begin + block_size, count);
        encode_one_block(x, begin, end, values, n_values, codes, scales + blk);
    }
}

void encode_blocks(const double* x, std::size_t count, std::size_t block_size,
                   const double* values, std::size_t n_values,
                   std::uint8_t* codes, double* scales) {
    if (count >= parallel_grain && count / block_size > 1) {
        encode_blocks_parallel(x, count, block_size, values, n_values, codes, scales);
    } else {
        encode_blocks_serial(x, count, block_size, values, n_values, codes, scales);
    }
}

void decode_blocks_serial(const std::uint8_t* codes, std::size_t count,
                          std::size_t block_size, const double* values,
                          const double* scales, double* out) {
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = scales[i / block_size] * values[codes[i]];
    }
}

void decode_blocks_parallel(const std::uint8_t* codes, std::size_t count,
                            std::size_t block_size, const double* values,
                            const double* scales, double* out) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
        out[i] = scales[static_cast<std::size_t>(i) / block_size] * values[codes[i]];
    }
}

void decode_blocks(const std::uint8_t* codes, std::size_t count,
                   std::size_t block_size, const double* values,
                   const double* scales, double* out) {
    if (count >= parallel_grain) {
        decode_blocks_parallel(codes, count, block_size, values, scales, out);
    } else {
        decode_blocks_serial(codes, count, block_size, values, scales, out);
    }
}

} // namespace mixq::kernels
