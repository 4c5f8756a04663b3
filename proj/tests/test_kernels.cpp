#include "mixq/kernels.hpp"
#include "mixq/matrix.hpp"
#include "mixq/quantizer.hpp"
#include "mixq/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstring>

using namespace mixq;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * rng.uniform(-1.0, 1.0);
    return m;
}

} // namespace

TEST_CASE("matmul parallel is bit-identical to the serial reference") {
    Rng rng(1);
    for (const auto [m, k, n] : {std::tuple{1, 1, 1}, {3, 5, 7}, {17, 33, 9}, {64, 64, 64},
                                 {130, 70, 31}}) {
        const Matrix a = random_matrix(m, k, rng);
        const Matrix b = random_matrix(k, n, rng);
        Matrix c_serial(m, n), c_parallel(m, n);
        kernels::matmul_serial(a.data.data(), b.data.data(), c_serial.data.data(),
                               static_cast<std::size_t>(m), static_cast<std::size_t>(k),
                               static_cast<std::size_t>(n));
        kernels::matmul_parallel(a.data.data(), b.data.data(), c_parallel.data.data(),
                                 static_cast<std::size_t>(m), static_cast<std::size_t>(k),
                                 static_cast<std::size_t>(n));
        CHECK(bitwise_equal(c_serial, c_parallel));
    }
}

TEST_CASE("matmul matches the naive ijk oracle to 0 ulp") {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const int m = rng.uniform_int(1, 20);
        const int k = rng.uniform_int(1, 20);
        const int n = rng.uniform_int(1, 20);
        const Matrix a = random_matrix(m, k, rng);
        const Matrix b = random_matrix(k, n, rng);
        const Matrix got = matmul(a, b);
        const Matrix want = oracles::matmul_ijk(a, b);
        CHECK(bitwise_equal(got, want));
    }
}

TEST_CASE("encode/decode parallel kernels are bit-identical to serial") {
    Rng rng(3);
    const Codebook cb = build_codebook(4, CodebookKind::NormalFloat);
    for (const std::size_t count : {1ul, 63ul, 64ul, 65ul, 5000ul}) {
        std::vector<double> x(count);
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        const std::size_t block = 64;
        const std::size_t blocks = (count + block - 1) / block;
        std::vector<std::uint8_t> c1(count), c2(count);
        std::vector<double> s1(blocks), s2(blocks);
        kernels::encode_blocks_serial(x.data(), count, block, cb.values.data(),
                                      cb.values.size(), c1.data(), s1.data());
        kernels::encode_blocks_parallel(x.data(), count, block, cb.values.data(),
                                        cb.values.size(), c2.data(), s2.data());
        CHECK(c1 == c2);
        CHECK(std::memcmp(s1.data(), s2.data(), blocks * sizeof(double)) == 0);

        std::vector<double> d1(count), d2(count);
        kernels::decode_blocks_serial(c1.data(), count, block, cb.values.data(), s1.data(),
                                      d1.data());
        kernels::decode_blocks_parallel(c1.data(), count, block, cb.values.data(), s1.data(),
                                        d2.data());
        CHECK(std::memcmp(d1.data(), d2.data(), count * sizeof(double)) == 0);
    }
}

TEST_CASE("nearest_code resolves duplicate codebook values to the lowest index") {
    // fp4 has two zero slots at indices 7 and 8
    const Codebook cb = build_codebook(4, CodebookKind::Fp4);
    CHECK(kernels::nearest_code(cb.values.data(), cb.values.size(), 0.0) == 7);
    CHECK(kernels::nearest_code(cb.values.data(), cb.values.size(), 1e-9) == 7);
    CHECK(kernels::nearest_code(cb.values.data(), cb.values.size(), -1e-9) == 7);
}

TEST_CASE("matrix helpers") {
    Rng rng(4);
    const Matrix a = random_matrix(5, 3, rng);
    CHECK(bitwise_equal(transpose(transpose(a)), a));
    CHECK(max_abs_diff(matmul(Matrix::identity(5), a), a) == 0.0);

    Matrix b = a;
    add_in_place(b, a);
    Matrix twice = a;
    scale_in_place(twice, 2.0);
    CHECK(bitwise_equal(b, twice));
    CHECK(frobenius_norm(Matrix::zeros(4, 4)) == 0.0);
}
