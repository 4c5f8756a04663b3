// Compares the serial reference kernels against the OpenMP versions and
// checks that both produce bit-identical output while timing them.

#include "mixq/kernels.hpp"
#include "mixq/quantizer.hpp"
#include "mixq/rng.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn(); // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void fill_random(std::vector<double>& v, mixq::Rng& rng) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; parallel entry points run serially\n");
#endif
    mixq::Rng rng(42);

    std::printf("\n%-28s %12s %12s %9s %s\n", "kernel", "serial ms", "parallel ms", "speedup",
                "bitwise");
    for (const std::size_t dim : {64ul, 128ul, 256ul, 512ul}) {
        std::vector<double> a(dim * dim), b(dim * dim), c1(dim * dim), c2(dim * dim);
        fill_random(a, rng);
        fill_random(b, rng);
        const int reps = dim <= 128 ? 50 : 10;
        const double ts = time_ms(
            [&] { mixq::kernels::matmul_serial(a.data(), b.data(), c1.data(), dim, dim, dim); },
            reps);
        const double tp = time_ms(
            [&] { mixq::kernels::matmul_parallel(a.data(), b.data(), c2.data(), dim, dim, dim); },
            reps);
        const bool same = std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(double)) == 0;
        std::printf("matmul %4zux%-4zu             %12.3f %12.3f %8.2fx %s\n", dim, dim, ts, tp,
                    ts / tp, same ? "ok" : "MISMATCH");
    }

    const mixq::Codebook cb = mixq::build_codebook(4, mixq::CodebookKind::NormalFloat);
    for (const std::size_t count : {1ul << 16, 1ul << 18, 1ul << 20}) {
        std::vector<double> x(count);
        fill_random(x, rng);
        const std::size_t block = 64;
        const std::size_t blocks = (count + block - 1) / block;
        std::vector<std::uint8_t> codes1(count), codes2(count);
        std::vector<double> scales1(blocks), scales2(blocks);
        const int reps = 20;
        const double ts = time_ms(
            [&] {
                mixq::kernels::encode_blocks_serial(x.data(), count, block, cb.values.data(),
                                                    cb.values.size(), codes1.data(),
                                                    scales1.data());
            },
            reps);
        const double tp = time_ms(
            [&] {
                mixq::kernels::encode_blocks_parallel(x.data(), count, block, cb.values.data(),
                                                      cb.values.size(), codes2.data(),
                                                      scales2.data());
            },
            reps);
        const bool same =
            codes1 == codes2 &&
            std::memcmp(scales1.data(), scales2.data(), blocks * sizeof(double)) == 0;
        std::printf("encode nf4 %8zu elems    %12.3f %12.3f %8.2fx %s\n", count, ts, tp, ts / tp,
                    same ? "ok" : "MISMATCH");

        std::vector<double> out1(count), out2(count);
        const double ds = time_ms(
            [&] {
                mixq::kernels::decode_blocks_serial(codes1.data(), count, block,
                                                    cb.values.data(), scales1.data(),
                                                    out1.data());
            },
            reps);
        const double dp = time_ms(
            [&] {
                mixq::kernels::decode_blocks_parallel(codes1.data(), count, block,
                                                      cb.values.data(), scales1.data(),
                                                      out2.data());
            },
            reps);
        const bool dsame = std::memcmp(out1.data(), out2.data(), count * sizeof(double)) == 0;
        std::printf("decode nf4 %8zu elems    %12.3f %12.3f %8.2fx %s\n", count, ds, dp, ds / dp,
                    dsame ? "ok" : "MISMATCH");
    }
    return 0;
}
