#pragma once

#include "mixq/matrix.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mixq {

enum class CodebookKind : std::uint8_t { Uniform = 0, NormalFloat = 1, Fp4 = 2 };

const char* to_string(CodebookKind kind);
CodebookKind codebook_kind_from_string(const std::string& s);

// The 2^bits real values an N-bit code decodes to, over the normalized range
// [-1, 1]. Values are strictly increasing except for Fp4, whose duplicate
// zero slot relaxes the invariant to non-decreasing.
struct Codebook {
    int bits = 0;
    CodebookKind kind = CodebookKind::Uniform;
    std::vector<double> values;
};

// bits in {4, 8}; Fp4 requires bits == 4
Codebook build_codebook(int bits, CodebookKind kind);

// Packed integer codes + per-block absmax scales standing in for a frozen
// weight matrix. Codes are one byte each in memory and bit-packed on disk.
struct QuantizedMatrix {
    int rows = 0;
    int cols = 0;
    int block_size = 0;
    Codebook codebook;
    std::vector<std::uint8_t> codes;  // rows*cols entries, row-major
    std::vector<double> scales;       // ceil(rows*cols / block_size) entries

    std::size_t count() const { return static_cast<std::size_t>(rows) * cols; }
    std::size_t n_blocks() const {
        return (count() + block_size - 1) / static_cast<std::size_t>(block_size);
    }
};

QuantizedMatrix quantize(const Matrix& w, const Codebook& codebook, int block_size);
Matrix dequantize(const QuantizedMatrix& q);

// equals dequantize(q) * x exactly; quantization error lives only in storage
Matrix simulated_matmul(const QuantizedMatrix& q, const Matrix& x);

bool bitwise_equal(const QuantizedMatrix& a, const QuantizedMatrix& b);

// Binary format: rows u32, cols u32, bits u8, kind u8, block_size u32 (all
// little-endian), scales as little-endian f64, then codes bit-packed at
// `bits` bits each, row-major, LSB-first within each byte.
void save_quantized(const QuantizedMatrix& q, std::ostream& out);
QuantizedMatrix load_quantized(std::istream& in);

} // namespace mixq
