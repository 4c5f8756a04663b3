#include "mixq/quantizer.hpp"

#include "mixq/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mixq;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * rng.uniform(-1.0, 1.0);
    return m;
}

const std::vector<Codebook>& all_codebooks() {
    static const std::vector<Codebook> books = {
        build_codebook(4, CodebookKind::Uniform),  build_codebook(8, CodebookKind::Uniform),
        build_codebook(4, CodebookKind::NormalFloat),
        build_codebook(8, CodebookKind::NormalFloat),
        build_codebook(4, CodebookKind::Fp4),
    };
    return books;
}

} // namespace

TEST_CASE("uniform codebooks: endpoints, spacing, symmetry") {
    const Codebook u4 = build_codebook(4, CodebookKind::Uniform);
    CHECK(u4.values.size() == 16);
    CHECK(u4.values.front() == -1.0);
    CHECK(u4.values.back() == 1.0);
    for (std::size_t i = 0; i + 1 < u4.values.size(); ++i) {
        CHECK(u4.values[i + 1] - u4.values[i] == doctest::Approx(2.0 / 15).epsilon(1e-12));
    }

    const Codebook u8 = build_codebook(8, CodebookKind::Uniform);
    CHECK(u8.values.size() == 256);
    CHECK(u8.values[128] - u8.values[127] == 2.0 / 255.0); // exact: symmetric halves
    for (std::size_t i = 0; i < 128; ++i) {
        CHECK(u8.values[i] == -u8.values[255 - i]);
    }
}

TEST_CASE("normalfloat codebooks: endpoints, symmetry, strict growth") {
    for (int bits : {4, 8}) {
        const Codebook nf = build_codebook(bits, CodebookKind::NormalFloat);
        const std::size_t n = nf.values.size();
        CHECK(n == (std::size_t{1} << bits));
        CHECK(nf.values.front() == -1.0);
        CHECK(nf.values.back() == 1.0);
        for (std::size_t i = 0; i < n / 2; ++i) {
            CHECK(nf.values[i] == -nf.values[n - 1 - i]);
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            CHECK(nf.values[i] < nf.values[i + 1]);
        }
        // heavier mass near zero than the uniform grid: first gap wider than
        // the innermost gap
        CHECK(nf.values[1] - nf.values[0] > nf.values[n / 2] - nf.values[n / 2 - 1]);
    }
}

TEST_CASE("fp4 codebook: e2m1 magnitudes, duplicate zero, non-decreasing") {
    const Codebook fp4 = build_codebook(4, CodebookKind::Fp4);
    CHECK(fp4.values.size() == 16);
    CHECK(fp4.values.front() == -1.0);
    CHECK(fp4.values.back() == 1.0);
    CHECK(fp4.values[7] == 0.0);
    CHECK(fp4.values[8] == 0.0);
    for (std::size_t i = 0; i + 1 < 16; ++i) {
        CHECK(fp4.values[i] <= fp4.values[i + 1]);
    }
    CHECK(fp4.values[15] == doctest::Approx(6.0 / 6));
    CHECK(fp4.values[14] == doctest::Approx(4.0 / 6));
    CHECK(fp4.values[9] == doctest::Approx(0.5 / 6));
}

TEST_CASE("build_codebook rejects unsupported combinations") {
    CHECK_THROWS(build_codebook(2, CodebookKind::Uniform));
    CHECK_THROWS(build_codebook(16, CodebookKind::NormalFloat));
    CHECK_THROWS(build_codebook(8, CodebookKind::Fp4));
}

TEST_CASE("quantize: all-zero matrix gets zero scales and decodes to zero") {
    const Matrix w = Matrix::zeros(7, 5);
    for (const Codebook& cb : all_codebooks()) {
        const QuantizedMatrix q = quantize(w, cb, 4);
        for (double s : q.scales) CHECK(s == 0.0);
        CHECK(max_abs(dequantize(q)) == 0.0);
    }
}

TEST_CASE("quantize: single block [-3, 0, 3] under uniform 4-bit") {
    Matrix w(1, 3);
    w.data = {-3.0, 0.0, 3.0};
    const Codebook cb = build_codebook(4, CodebookKind::Uniform);
    const QuantizedMatrix q = quantize(w, cb, 3);
    REQUIRE(q.scales.size() == 1);
    CHECK(q.scales[0] == 3.0);
    CHECK(q.codes[0] == 0);  // -1 exactly
    CHECK(q.codes[2] == 15); // +1 exactly
    const Matrix back = dequantize(q);
    CHECK(max_abs_diff(back, w) <= 3.0 * (2.0 / 15) / 2 + 1e-12);
}

TEST_CASE("quantize: single element 5.0 with block_size 1 is exact") {
    Matrix w(1, 1);
    w.data = {5.0};
    const QuantizedMatrix q = quantize(w, build_codebook(4, CodebookKind::Uniform), 1);
    CHECK(q.scales[0] == 5.0);
    CHECK(q.codes[0] == 15);
    CHECK(dequantize(q).data[0] == 5.0);
}

TEST_CASE("quantize rejects non-finite input and bad block size") {
    Matrix w(1, 2);
    w.data = {1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS(quantize(w, build_codebook(4, CodebookKind::Uniform), 1));
    Matrix ok(1, 2);
    CHECK_THROWS(quantize(ok, build_codebook(4, CodebookKind::Uniform), 0));
}

TEST_CASE("dequantize rejects out-of-range codes") {
    Matrix w(2, 2);
    w.data = {1.0, -1.0, 0.5, 0.25};
    QuantizedMatrix q = quantize(w, build_codebook(4, CodebookKind::Uniform), 2);
    q.codes[1] = 200;
    CHECK_THROWS(dequantize(q));
}

TEST_CASE("every encoded index is the exhaustive argmin (ties to lower index)") {
    Rng rng(11);
    for (const Codebook& cb : all_codebooks()) {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix w = random_matrix(rng.uniform_int(1, 8), rng.uniform_int(1, 8), rng,
                                           std::pow(10.0, rng.uniform_int(-2, 2)));
            const int block = rng.uniform_int(1, 9);
            const QuantizedMatrix q = quantize(w, cb, block);
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double scale = q.scales[i / static_cast<std::size_t>(block)];
                const double y = scale == 0.0 ? 0.0 : w.data[i] / scale;
                CHECK(q.codes[i] == oracles::nearest_code_exhaustive(cb.values, y));
            }
        }
    }
}

TEST_CASE("roundtrip bound holds per block for uniform codebooks") {
    Rng rng(12);
    for (int bits : {4, 8}) {
        const Codebook cb = build_codebook(bits, CodebookKind::Uniform);
        const double half_step = 1.0 / static_cast<double>((1 << bits) - 1);
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix w = random_matrix(rng.uniform_int(2, 12), rng.uniform_int(2, 12), rng,
                                           4.0);
            const int block = rng.uniform_int(1, 17);
            const QuantizedMatrix q = quantize(w, cb, block);
            const Matrix back = dequantize(q);
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double scale = q.scales[i / static_cast<std::size_t>(block)];
                CHECK(std::fabs(back.data[i] - w.data[i]) <=
                      scale * half_step * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}

TEST_CASE("quantize-dequantize-quantize is a bitwise fixed point") {
    Rng rng(13);
    for (const Codebook& cb : all_codebooks()) {
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix w = random_matrix(rng.uniform_int(1, 10), rng.uniform_int(1, 10), rng,
                                           3.0);
            const int block = rng.uniform_int(1, 8);
            const QuantizedMatrix q1 = quantize(w, cb, block);
            const QuantizedMatrix q2 = quantize(dequantize(q1), cb, block);
            CHECK(bitwise_equal(q1, q2));
        }
    }
}

TEST_CASE("8-bit uniform reconstruction error never exceeds 4-bit") {
    Rng rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix w = random_matrix(8, 8, rng, 2.0);
        const Codebook cb4 = build_codebook(4, CodebookKind::Uniform);
        const Codebook cb8 = build_codebook(8, CodebookKind::Uniform);
        const Matrix r4 = sub(dequantize(quantize(w, cb4, 16)), w);
        const Matrix r8 = sub(dequantize(quantize(w, cb8, 16)), w);
        const double mse4 = frobenius_norm(r4);
        const double mse8 = frobenius_norm(r8);
        CHECK(mse8 <= mse4 + 1e-12);
    }
}

TEST_CASE("simulated_matmul") {
    Rng rng(15);
    const Matrix w = random_matrix(6, 4, rng);
    const QuantizedMatrix q = quantize(w, build_codebook(4, CodebookKind::NormalFloat), 4);

    SUBCASE("identity operand returns the dequantized matrix") {
        CHECK(bitwise_equal(simulated_matmul(q, Matrix::identity(4)), dequantize(q)));
    }
    SUBCASE("zero operand returns zeros") {
        CHECK(max_abs(simulated_matmul(q, Matrix::zeros(4, 3))) == 0.0);
    }
    SUBCASE("matches the dequantize-then-multiply oracle to 0 ulp") {
        const Matrix x = random_matrix(4, 5, rng);
        const Matrix got = simulated_matmul(q, x);
        const Matrix want = oracles::matmul_ijk(dequantize(q), x);
        CHECK(bitwise_equal(got, want));
    }
    SUBCASE("shape mismatch throws") {
        CHECK_THROWS(simulated_matmul(q, Matrix::zeros(5, 2)));
    }
}

TEST_CASE("binary serialization round-trips bit-exactly") {
    Rng rng(16);
    for (const Codebook& cb : all_codebooks()) {
        const Matrix w = random_matrix(rng.uniform_int(1, 9), rng.uniform_int(1, 9), rng, 2.0);
        const QuantizedMatrix q = quantize(w, cb, rng.uniform_int(1, 7));
        std::stringstream stream;
        save_quantized(q, stream);
        const QuantizedMatrix back = load_quantized(stream);
        CHECK(bitwise_equal(q, back));
        CHECK(bitwise_equal(dequantize(q), dequantize(back)));
    }
}

TEST_CASE("4-bit codes pack two per byte, LSB-first") {
    Matrix w(1, 2);
    w.data = {1.0, -1.0}; // codes 15 and 0
    const QuantizedMatrix q = quantize(w, build_codebook(4, CodebookKind::Uniform), 2);
    REQUIRE(q.codes[0] == 15);
    REQUIRE(q.codes[1] == 0);
    std::stringstream stream;
    save_quantized(q, stream);
    const std::string bytes = stream.str();
    // header: 4 + 4 + 1 + 1 + 4 = 14 bytes, one f64 scale, then one code byte
    REQUIRE(bytes.size() == 14 + 8 + 1);
    CHECK(static_cast<unsigned char>(bytes[22]) == 0x0F); // 15 in the low nibble
}

TEST_CASE("truncated stream is reported as corrupt") {
    Matrix w(4, 4);
    for (std::size_t i = 0; i < w.size(); ++i) w.data[i] = static_cast<double>(i) - 7.5;
    const QuantizedMatrix q = quantize(w, build_codebook(8, CodebookKind::Uniform), 4);
    std::stringstream stream;
    save_quantized(q, stream);
    const std::string bytes = stream.str();
    std::stringstream cut(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS(load_quantized(cut));
}
