#include "mixq/quantizer.hpp"

#include "mixq/kernels.hpp"
#include "mixq/numerics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mixq {

const char* to_string(CodebookKind kind) {
    switch (kind) {
    case CodebookKind::Uniform: return "uniform";
    case CodebookKind::NormalFloat: return "normalfloat";
    case CodebookKind::Fp4: return "fp4";
    }
    return "?";
}

CodebookKind codebook_kind_from_string(const std::string& s) {
    if (s == "uniform") return CodebookKind::Uniform;
    if (s == "normalfloat" || s == "nf4" || s == "nf") return CodebookKind::NormalFloat;
    if (s == "fp4") return CodebookKind::Fp4;
    throw std::invalid_argument("unknown codebook kind: " + s);
}

namespace {

std::vector<double> uniform_values(int n) {
    // (2i - (n-1)) / (n-1): endpoints land on -1/+1 exactly and the grid is
    // symmetric because division is sign-symmetric
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] =
            static_cast<double>(2 * i - (n - 1)) / static_cast<double>(n - 1);
    }
    return v;
}

std::vector<double> normalfloat_values(int n) {
    // c_i = phi^-1(delta + i*(1-2*delta)/(n-1)) / phi^-1(1-delta) with
    // delta = 1/(2*(n+1)). Only the upper half is evaluated; the lower half
    // is its mirror image, which the probabilities satisfy exactly
    // (p_i + p_{n-1-i} = 1), so the codebook is symmetric and the endpoints
    // are exactly +-1.
    const double delta = 1.0 / (2.0 * (static_cast<double>(n) + 1.0));
    const double step = (1.0 - 2.0 * delta) / static_cast<double>(n - 1);
    const double top = inverse_normal_cdf(1.0 - delta);
    std::vector<double> v(static_cast<std::size_t>(n));
    v[static_cast<std::size_t>(n - 1)] = 1.0;
    v[0] = -1.0;
    for (int i = n / 2; i < n - 1; ++i) {
        const double p = delta + static_cast<double>(i) * step;
        const double c = inverse_normal_cdf(p) / top;
        v[static_cast<std::size_t>(i)] = c;
        v[static_cast<std::size_t>(n - 1 - i)] = -c;
    }
    return v;
}

std::vector<double> fp4_values() {
    // E2M1 magnitudes {0, .5, 1, 1.5, 2, 3, 4, 6}/6 with both signs; the
    // duplicate zero is kept as a second code that also decodes to 0, so the
    // list is non-decreasing rather than strictly increasing
    const std::array<double, 8> mag = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
    std::vector<double> v;
    v.reserve(16);
    for (int i = 7; i >= 0; --i) v.push_back(-mag[static_cast<std::size_t>(i)] / 6.0);
    for (int i = 0; i < 8; ++i) v.push_back(mag[static_cast<std::size_t>(i)] / 6.0);
    v[7] = 0.0; // -0 slot normalizes to plain zero
    return v;
}

} // namespace

Codebook build_codebook(int bits, CodebookKind kind) {
    if (bits != 4 && bits != 8) {
        throw std::invalid_argument("build_codebook: bits must be 4 or 8, got " +
                                    std::to_string(bits));
    }
    if (kind == CodebookKind::Fp4 && bits != 4) {
        throw std::invalid_argument("build_codebook: Fp4 requires bits == 4");
    }
    const int n = 1 << bits;
    Codebook cb;
    cb.bits = bits;
    cb.kind = kind;
    switch (kind) {
    case CodebookKind::Uniform: cb.values = uniform_values(n); break;
    case CodebookKind::NormalFloat: cb.values = normalfloat_values(n); break;
    case CodebookKind::Fp4: cb.values = fp4_values(); break;
    }
    return cb;
}

QuantizedMatrix quantize(const Matrix& w, const Codebook& codebook, int block_size) {
    if (block_size < 1) {
        throw std::invalid_argument("quantize: block_size must be >= 1");
    }
    if (!all_finite(w)) {
        throw std::invalid_argument("quantize: input matrix has non-finite entries");
    }
    QuantizedMatrix q;
    q.rows = w.rows;
    q.cols = w.cols;
    q.block_size = block_size;
    q.codebook = codebook;
    q.codes.resize(w.size());
    q.scales.resize(q.n_blocks());
    kernels::encode_blocks(w.data.data(), w.size(), static_cast<std::size_t>(block_size),
                           codebook.values.data(), codebook.values.size(), q.codes.data(),
                           q.scales.data());
    return q;
}

Matrix dequantize(const QuantizedMatrix& q) {
    for (std::uint8_t c : q.codes) {
        if (c >= q.codebook.values.size()) {
            throw std::runtime_error("dequantize: code " + std::to_string(int(c)) +
                                     " out of codebook range (corrupt input)");
        }
    }
    Matrix out(q.rows, q.cols);
    kernels::decode_blocks(q.codes.data(), q.count(), static_cast<std::size_t>(q.block_size),
                           q.codebook.values.data(), q.scales.data(), out.data.data());
    return out;
}

Matrix simulated_matmul(const QuantizedMatrix& q, const Matrix& x) {
    if (q.cols != x.rows) {
        throw std::invalid_argument("simulated_matmul: shape mismatch");
    }
    return matmul(dequantize(q), x);
}

bool bitwise_equal(const QuantizedMatrix& a, const QuantizedMatrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.block_size == b.block_size &&
           a.codebook.bits == b.codebook.bits && a.codebook.kind == b.codebook.kind &&
           a.codes == b.codes &&
           (a.scales.empty() ||
            std::memcmp(a.scales.data(), b.scales.data(), a.scales.size() * sizeof(double)) == 0);
}

namespace {

void put_u32_le(std::ostream& out, std::uint32_t v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                               static_cast<std::uint8_t>(v >> 16),
                               static_cast<std::uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::istream& in) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("quantized stream truncated");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64_le(std::ostream& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64_le(std::istream& in) {
    std::uint8_t b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("quantized stream truncated");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

} // namespace

void save_quantized(const QuantizedMatrix& q, std::ostream& out) {
    put_u32_le(out, static_cast<std::uint32_t>(q.rows));
    put_u32_le(out, static_cast<std::uint32_t>(q.cols));
    out.put(static_cast<char>(q.codebook.bits));
    out.put(static_cast<char>(q.codebook.kind));
    put_u32_le(out, static_cast<std::uint32_t>(q.block_size));
    for (double s : q.scales) put_f64_le(out, s);

    const int bits = q.codebook.bits;
    std::uint32_t acc = 0;
    int filled = 0;
    for (std::uint8_t code : q.codes) {
        acc |= static_cast<std::uint32_t>(code) << filled; // LSB-first
        filled += bits;
        while (filled >= 8) {
            out.put(static_cast<char>(acc & 0xFF));
            acc >>= 8;
            filled -= 8;
        }
    }
    if (filled > 0) out.put(static_cast<char>(acc & 0xFF));
    if (!out) throw std::runtime_error("save_quantized: write failed");
}

QuantizedMatrix load_quantized(std::istream& in) {
    QuantizedMatrix q;
    q.rows = static_cast<int>(get_u32_le(in));
    q.cols = static_cast<int>(get_u32_le(in));
    const int bits = in.get();
    const int kind = in.get();
    if (!in || q.rows <= 0 || q.cols <= 0) {
        throw std::runtime_error("load_quantized: corrupt header");
    }
    if (kind < 0 || kind > 2) {
        throw std::runtime_error("load_quantized: unknown codebook kind " + std::to_string(kind));
    }
    q.block_size = static_cast<int>(get_u32_le(in));
    if (q.block_size < 1) throw std::runtime_error("load_quantized: corrupt block_size");
    q.codebook = build_codebook(bits, static_cast<CodebookKind>(kind));

    q.scales.resize(q.n_blocks());
    for (double& s : q.scales) s = get_f64_le(in);

    q.codes.resize(q.count());
    std::uint32_t acc = 0;
    int avail = 0;
    const std::uint32_t mask = (1u << bits) - 1u;
    for (std::uint8_t& code : q.codes) {
        if (avail < bits) {
            const int byte = in.get();
            if (byte < 0) throw std::runtime_error("quantized stream truncated");
            acc |= static_cast<std::uint32_t>(byte) << avail;
            avail += 8;
        }
        code = static_cast<std::uint8_t>(acc & mask);
        acc >>= bits;
        avail -= bits;
    }
    return q;
}

} // namespace mixq
